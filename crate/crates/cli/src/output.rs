use std::fmt;
use std::io::{self, Write};

use crate::error::CliError;

/// Writes one line to stdout. A closed pipe ends the process quietly, as
/// when piping into `head`; other failures exit with the I/O code.
pub fn line(args: fmt::Arguments<'_>) {
    let mut out = io::stdout().lock();
    if let Err(e) = out.write_fmt(args).and_then(|()| out.write_all(b"\n")) {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        let err = CliError::io("<stdout>", e);
        eprintln!("error: {err}");
        std::process::exit(err.code().into());
    }
}

macro_rules! outln {
    () => {
        $crate::output::line(format_args!(""))
    };
    ($($arg:tt)*) => {
        $crate::output::line(format_args!($($arg)*))
    };
}
pub(crate) use outln;
