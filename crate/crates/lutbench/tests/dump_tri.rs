// temporary debug helper, compiled as a test
#[test]
fn dump_failing_triangulation() {
    use lutbench::rng::SplitMix64;
    use lutbench::numerics::Matrix;
    use lutbench::simplex::SimplicialComplex;
    use std::io::Write;
    let d = 2usize;
    let set = 0u64;
    let mut rng = SplitMix64::derived(40 + set, &[d as u64]);
    let n = 10 + (rng.next_below(41)) as usize;
    let pts = Matrix::from_fn(n, d, |_, _| rng.next_f64());
    let c = SimplicialComplex::build(&pts).unwrap();
    let mut f = std::fs::File::create("/tmp/tri.txt").unwrap();
    writeln!(f, "{} {}", n, d).unwrap();
    for i in 0..n {
        let r = pts.row(i);
        writeln!(f, "{} {}", r[0], r[1]).unwrap();
    }
    writeln!(f, "{}", c.num_simplices()).unwrap();
    for s in 0..c.num_simplices() {
        let v = c.simplex_vertices(s);
        writeln!(f, "{} {} {}", v[0], v[1], v[2]).unwrap();
    }
}
