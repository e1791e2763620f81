use std::io;
use std::process;

use morse_census::cli::{run, Context, CACHE_ENV};

fn main() {
    let (stdin, stdout, stderr) = (io::stdin(), io::stdout(), io::stderr());
    let mut ctx = Context {
        default_cache: std::env::var_os(CACHE_ENV).map(Into::into),
        stdin: &mut stdin.lock(),
        stdout: &mut stdout.lock(),
        stderr: &mut stderr.lock(),
    };
    let code = run(std::env::args_os(), &mut ctx);
    let _ = ctx.stdout.flush();
    process::exit(code);
}
