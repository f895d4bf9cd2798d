//! Drive a run from a preset file, as the binary does, with overrides.
//!
//! ```text
//! cargo run --release --example config_driven_run -- presets/mvt_adaptive.toml time=20000
//! ```

use restore_kit::cli::{dispatch, parse_config, DispatchOptions};

fn main() -> restore_kit::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "presets/mvt_adaptive.toml".to_string());
    let mut spec = parse_config(&path)?;
    let command = spec.run.command.unwrap_or(restore_kit::cli::Command::RunAdaptive);
    for o in args {
        spec.apply_override(command, &o)?;
    }
    let options = DispatchOptions {
        out: Some(std::env::temp_dir().join("restore-kit-example")),
        ..Default::default()
    };
    for outcome in dispatch(command, &spec, &options)? {
        for line in outcome.report {
            println!("{line}");
        }
    }
    Ok(())
}
