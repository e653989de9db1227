//! The spectral facts the analysis rests on, demonstrated on a random
//! connected graph: the Laplacian's structural zero eigenvalue, the
//! pseudoinverse projector identity, and positivity of the regularized
//! Laplacian.

use apnet::graph::{f_matrix_min_eig, spectrum, Graph};
use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let g = Graph::random_connected(7, 0.3, &mut rng).unwrap();
    let n = g.node_count();
    println!(
        "random connected graph: {n} nodes, {} edges",
        g.edges().len()
    );

    let l = g.laplacian();
    let spectral = spectrum(&l).unwrap();
    print!("Laplacian eigenvalues:");
    for v in &spectral.eigenvalues {
        print!(" {v:.4}");
    }
    println!();
    println!(
        "lambda_1 = {:.2e} (structurally zero)",
        spectral.eigenvalues[0]
    );
    println!(
        "lambda_2 = {:.4} (positive iff connected)",
        spectral.eigenvalues[1]
    );

    let l_pinv = g.laplacian_pseudoinverse().unwrap();
    let product = l.dot(&l_pinv);
    let mut residual = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let projector = if i == j {
                1.0 - 1.0 / n as f64
            } else {
                -1.0 / n as f64
            };
            residual = residual.max((product[[i, j]] - projector).abs());
        }
    }
    println!("max |L L+ - (I - 11^T/n)| = {residual:.2e}");

    // Pinning a single agent makes the whole matrix positive definite.
    let mut k = Array1::zeros(n);
    k[0] = 0.25;
    println!(
        "lambda_min(L + diag(0.25, 0, ..., 0)) = {:.4}",
        f_matrix_min_eig(&l, &k).unwrap()
    );
}
