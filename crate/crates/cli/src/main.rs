use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use rgbiw_cli::{run, Format, Report, RunConfig};

fn render(report: &Report, format: Format) -> String {
    let out = match format {
        Format::Json => report.to_json().map(|s| s + "\n"),
        Format::Csv => report.to_csv(),
    };
    out.unwrap_or_else(|e| {
        format!("{{\"schema_version\":\"1\",\"error\":\"cannot serialize report: {e}\"}}\n")
    })
}

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (report, code) = match run(&config) {
        Ok(mut r) => {
            r.args = args;
            (r, 0)
        }
        Err(e) => {
            eprintln!("rgbiw: {e}");
            let mut r = Report::new(config.command.name());
            r.args = args;
            r.error = Some(e.to_string());
            (r, e.exit_code())
        }
    };
    let text = render(&report, config.format);
    let written = match &config.out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("rgbiw: cannot write report: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}
