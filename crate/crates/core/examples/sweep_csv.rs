//! Writes a small sweep in the CLI's CSV layout to stdout.

use gan_secrecy::cli::{sweep_rows, write_sweep_csv, PowerUnits, RateUnits, Scheme, SweepSpec, ValueGrid};
use gan_secrecy::solver::SolverConfig;
use gan_secrecy::QuadratureSpec;

fn main() {
    let spec = SweepSpec {
        h_norm_sq_values: vec![0.05, 0.2],
        p_total_values: ValueGrid::Range { start: 5.0, stop: 25.0, step: 5.0 },
        power_units: PowerUnits::Db,
        schemes: vec![Scheme::GanIterative, Scheme::GoelNegi, Scheme::NoAn],
        output_path: None,
        rate_units: RateUnits::Bits,
        n_t: 2,
    };
    let rows = sweep_rows(&spec, &SolverConfig::default(), &QuadratureSpec::default()).unwrap();
    write_sweep_csv(&rows, spec.rate_units, std::io::stdout().lock()).unwrap();
}
