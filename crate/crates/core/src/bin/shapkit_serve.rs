//! Serve a model over the newline-delimited JSON protocol on stdin/stdout.
//!
//! ```text
//! shapkit-serve --model model.json      # a dumped built-in model
//! shapkit-serve --echo-first 3          # returns the first feature of each row
//! ```
//!
//! `--fault <kind>` makes the server misbehave on the first predict request,
//! for exercising client error handling: `exit`, `garbage`, `hang`,
//! `wrong-id`, `short`.

use std::io::{self, BufRead, Write};
use std::process::ExitCode;

use shapkit::blackbox::protocol::{handle_line, Request};
use shapkit::blackbox::{BlackBox, BuiltinModel, FnModel};

fn usage() -> ExitCode {
    eprintln!(
        "usage: shapkit-serve (--model <file.json> | --echo-first <m>) [--fault exit|garbage|hang|wrong-id|short]"
    );
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut model: Option<Box<dyn BlackBox>> = None;
    let mut fault: Option<String> = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        match a.as_str() {
            "--model" => {
                let Some(path) = it.next() else { return usage() };
                match BuiltinModel::load_json(path) {
                    Ok(m) => model = Some(Box::new(m)),
                    Err(e) => {
                        eprintln!("shapkit-serve: {e}");
                        return ExitCode::FAILURE;
                    }
                }
            }
            "--echo-first" => {
                let Some(m) = it.next().and_then(|s| s.parse::<usize>().ok()) else {
                    return usage();
                };
                model = Some(Box::new(FnModel::new(m, |x: &[f64]| x[0])));
            }
            "--fault" => fault = it.next().cloned(),
            _ => return usage(),
        }
    }
    let Some(model) = model else { return usage() };

    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        let predict_id = match serde_json::from_str::<Request>(&line) {
            Ok(Request::Predict { id, .. }) => Some(id),
            _ => None,
        };
        if let (Some(id), Some(kind)) = (predict_id, fault.as_deref()) {
            match kind {
                "exit" => return ExitCode::from(3),
                "garbage" => {
                    let _ = writeln!(out, "this is not json");
                    let _ = out.flush();
                    continue;
                }
                "hang" => loop {
                    std::thread::sleep(std::time::Duration::from_secs(3600));
                },
                "wrong-id" => {
                    let _ = writeln!(out, "{{\"id\":{},\"predictions\":[]}}", id + 100);
                    let _ = out.flush();
                    continue;
                }
                "short" => {
                    let _ = writeln!(out, "{{\"id\":{id},\"predictions\":[]}}");
                    let _ = out.flush();
                    continue;
                }
                _ => {}
            }
        }
        if let Some(reply) = handle_line(model.as_ref(), &line) {
            if writeln!(out, "{reply}").and_then(|_| out.flush()).is_err() {
                break;
            }
        }
    }
    ExitCode::SUCCESS
}
