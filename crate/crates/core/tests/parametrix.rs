use num_complex::Complex64 as C;
use sl3scatter::flat::grid::ChamberGrid;
use sl3scatter::flat::operator::assemble_radial;
use sl3scatter::flat::spectral::SpectralParam;
use sl3scatter::parametrix::{CompositeParametrix, PartitionOfUnity};
use sl3scatter::Error;

#[test]
fn small_domain_is_refused_not_iterated() {
    // Too little room past the compact piece for the wedge models: the
    // error operator is not a contraction and the series must not be summed.
    let op = assemble_radial(ChamberGrid::new(0.2, 20.0).unwrap());
    let param = SpectralParam::new(C::new(-1.0, 0.0)).unwrap();
    let f = op
        .grid
        .sample(|z| C::new((-(z[0].hypot(z[1]) - 8.0).powi(2) / 4.0).exp(), 0.0));
    let pou = PartitionOfUnity::standard(&op.grid).unwrap();
    assert!(pou.sum_defect() < 1e-12);
    assert!(pou.psi_covers_phi());
    let cp = CompositeParametrix::new(&op, pou, param).unwrap();
    match cp.neumann_iterates(&f, 3) {
        Err(Error::NoContraction(c)) => assert!(c >= 1.0),
        other => panic!(
            "expected a contraction failure, got {:?}",
            other.map(|(_, h)| h)
        ),
    }
    // The parametrix itself is still defined and linear.
    let u = cp.apply(&f).unwrap();
    let twice: Vec<C> = f.iter().map(|x| x * 2.0).collect();
    let u2 = cp.apply(&twice).unwrap();
    assert!(u
        .iter()
        .zip(&u2)
        .all(|(a, b)| (a * 2.0 - b).norm() <= 1e-12 * b.norm().max(1.0)));
}
