//! The same star product computed three ways: kernel matrices, the truncated
//! derivative series, and the direct four-fold integral at a single node.

use moyal::star::{integral_star_at, kernel_star, series_star_diagnostic};
use moyal::{PhaseGrid, Result, SymbolField};

fn main() -> Result<()> {
    let grid = PhaseGrid::new(128, -6.0, 6.0, 0.25)?;
    let a = SymbolField::sample_real(grid, |x, p| (-(x * x + p * p) / 2.0).exp())?;
    let b = SymbolField::sample_real(grid, |x, p| (-((x - 0.5).powi(2) + (p + 0.3).powi(2)) / 1.5).exp())?;

    let kernel = kernel_star(&a, &b)?;
    for order in [2, 4, 8] {
        let (series, last) = series_star_diagnostic(&a, &b, order)?;
        println!(
            "series order {order}: distance to kernel {:.2e}, last term {:.2e}",
            series.distance_interior(&kernel)?,
            last
        );
    }

    let (i, j) = (grid.n() / 2 + 3, grid.n() / 2 - 2);
    let direct = integral_star_at(&a, &b, i, j)?;
    println!(
        "node ({:.3}, {:.3}): integral {:.10}, kernel {:.10}",
        grid.x(i),
        grid.p(j),
        direct,
        kernel.get(i, j)
    );
    Ok(())
}
