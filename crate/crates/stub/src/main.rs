use std::path::PathBuf;
use std::process::ExitCode;

fn usage() -> ExitCode {
    eprintln!("usage: kgforge-stub --fixtures <dir> [--port <n>]");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let mut fixtures: Option<PathBuf> = None;
    let mut port: u16 = 8089;
    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "--fixtures" => fixtures = args.next().map(PathBuf::from),
            "--port" => match args.next().and_then(|p| p.parse().ok()) {
                Some(p) => port = p,
                None => return usage(),
            },
            _ => return usage(),
        }
    }
    let Some(dir) = fixtures else {
        return usage();
    };
    let loaded = match kgforge_stub::load_fixture_dir(&dir) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    let count = loaded.len();
    match kgforge_stub::StubServer::start_on(&format!("127.0.0.1:{port}"), loaded) {
        Ok(server) => {
            eprintln!("serving {count} fixtures on {}", server.base_url());
            server.join();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
