// temporary convergence smoke check
use cweno::geom::Point2;
use cweno::mesh::{generate_box_mesh, BoxBounds, SplitPattern};
use cweno::recon::eval_poly;
use cweno::solver::{project_ic, BoundaryTable, FluxKind, Simulation, SolverConfig};
use cweno::systems::{Euler, System};
use nalgebra::SVector;

type E5 = SVector<f64, 5>;

fn vortex_prim(x: Point2, t: f64) -> E5 {
    let gamma = 1.4f64;
    let eps = 5.0f64;
    let xc = x.x - 1.0 * t;
    let yc = x.y - 1.0 * t;
    let r2 = (xc - 5.0).powi(2) + (yc - 5.0).powi(2);
    let factor = eps / (2.0 * std::f64::consts::PI) * (0.5 * (1.0 - r2)).exp();
    let du = -factor * (yc - 5.0);
    let dv = factor * (xc - 5.0);
    let dt_ = -(gamma - 1.0) * eps * eps / (8.0 * gamma * std::f64::consts::PI.powi(2))
        * (1.0 - r2).exp();
    let rho = (1.0 + dt_).powf(1.0 / (gamma - 1.0));
    let p = (1.0 + dt_).powf(gamma / (gamma - 1.0));
    E5::from_column_slice(&[rho, 1.0 + du, 1.0 + dv, 0.0, p])
}

fn main() {
    let m: usize = std::env::args().nth(1).unwrap().parse().unwrap();
    let t_end: f64 = 0.25;
    let sys = Euler::new(1.4);
    let mut prev: Option<(f64, f64)> = None;
    for h in [0.5f64, 0.25, 0.125] {
        let t0 = std::time::Instant::now();
        let mesh = generate_box_mesh((0.0, 10.0), (0.0, 10.0), h, SplitPattern::Crisscross, BoxBounds::periodic()).unwrap();
        let n = mesh.n_cells();
        let tables = cweno::tables::SchemeTables::new(m).unwrap();
        let averages = project_ic::<Euler>(&mesh, &tables, |x| sys.prim_to_cons(&vortex_prim(x, 0.0)));
        let mut sim = Simulation::new(sys, mesh, m, SolverConfig::eulerian(0.5, FluxKind::Osher), BoundaryTable::default(), averages).unwrap();
        let rep = sim.run_until(t_end).unwrap();
        let coeffs = sim.reconstruct().unwrap().to_vec();
        // L2 density error
        let rule = &sim.tables.err_rule;
        let mut err2 = 0.0;
        for i in 0..sim.mesh.n_cells() {
            let v = sim.mesh.vertices(i);
            let e1 = v[1] - v[0]; let e2 = v[2] - v[0];
            let det = sim.mesh.area(i) * 2.0;
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let xphys = v[0] + e1 * p.x + e2 * p.y;
                let wv = eval_poly::<Euler>(&sim.tables.basis, &coeffs[i*sim.tables.basis.size..(i+1)*sim.tables.basis.size], *p);
                let exact = sys.prim_to_cons(&vortex_prim(xphys, t_end));
                err2 += w * det * (wv[0] - exact[0]).powi(2);
            }
        }
        let err = err2.sqrt();
        let hmeas = sim.mesh.max_circumcircle_diameter();
        let order = prev.map(|(ph, pe): (f64, f64)| (pe / err).ln() / (ph / hmeas).ln()).unwrap_or(0.0);
        println!("M={m} h={hmeas:.4} cells={n} steps={} err={err:.4e} order={order:.2} iters={} wall={:.1}s", rep.steps, rep.max_picard_iters, t0.elapsed().as_secs_f64());
        prev = Some((hmeas, err));
    }
}
