//! Data-parallel paths against their sequential fallbacks. Both produce
//! identical results; these benches only measure the speed difference.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use tio2kit::crystal::{surface_mesh, BulkLattice, MillerIndex};
use tio2kit::mcia::{self, FilmSpec, MciaConfig};
use tio2kit::par::{self, Exec};
use tio2kit::vacancysim::{self, ScanMetric, ScheduleTemplate, SimOptions, VacancyParams};
use tio2kit::xrdfit::{self, VoigtPeak, CU_KA1};

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Auto), ("sequential", Exec::Sequential)];

fn plane(s: &str) -> MillerIndex {
    s.parse().unwrap()
}

fn bench_mcia(c: &mut Criterion) {
    let mut g = c.benchmark_group("mcia");
    // a large search: high-index film plane, wide area cap
    let sub = surface_mesh(&BulkLattice::si(), plane("100"));
    let film = surface_mesh(&BulkLattice::rutile(), plane("210"));
    let cfg = MciaConfig { max_area: 1500.0, max_linear_strain: 0.01, ..MciaConfig::default() };
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("single_search", name), |b| {
            b.iter(|| mcia::mcia_with(black_box(&sub), black_box(&film), &cfg, exec))
        });
    }

    let planes: Vec<MillerIndex> = ["100", "001", "110", "101", "111", "210", "211", "112"].map(plane).to_vec();
    let subs = vec![
        (BulkLattice::gaas(), plane("100")),
        (BulkLattice::gasb(), plane("100")),
        (BulkLattice::si(), plane("100")),
        (BulkLattice::gaas(), plane("111")),
    ];
    let films = vec![
        FilmSpec { lattice: BulkLattice::anatase(), planes: planes.clone() },
        FilmSpec { lattice: BulkLattice::rutile(), planes },
    ];
    let cfg = MciaConfig::default();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("orientation_map", name), |b| {
            b.iter(|| mcia::mcia_map_with(&subs, &films, &cfg, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_saturation_scan(c: &mut Criterion) {
    let mut g = c.benchmark_group("saturation_scan");
    g.sample_size(10);
    let buffers = [0.0, 2.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0];
    let params = VacancyParams::default();
    let template = ScheduleTemplate::default();
    let opts = SimOptions::default();
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| vacancysim::saturation_scan(&buffers, &template, &params, &opts, ScanMetric::ActiveLayer, exec))
        });
    }
    g.finish();
}

fn bench_batch_fits(c: &mut Criterion) {
    let mut g = c.benchmark_group("batch_voigt_fits");
    let scans: Vec<_> = (0..32u64)
        .map(|i| {
            let tt = 25.0 + 0.1 * i as f64;
            let (gw, lw) = xrdfit::breadths_for(22.0, 0.68, tt, CU_KA1, 0.9);
            let truth = VoigtPeak { offset: 50.0, ..VoigtPeak::exact(tt, gw, lw, 1000.0) };
            (xrdfit::synthetic_scan(&truth, (tt - 2.0, tt + 2.0), 401, 5.0, i), (tt - 2.0, tt + 2.0))
        })
        .collect();
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| par::map(exec, &scans, |(s, w)| xrdfit::fit_voigt(s, *w).map(|p| p.fwhm()))));
    }
    g.finish();
}

criterion_group!(benches, bench_mcia, bench_saturation_scan, bench_batch_fits);
criterion_main!(benches);
