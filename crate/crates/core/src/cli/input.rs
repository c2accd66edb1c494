use std::io::Read;

use sha2::{Digest, Sha256};

use super::CliError;

/// Raw bytes of `path`, or standard input for `-`.
pub fn read_bytes(path: &str) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let res = if path == "-" {
        std::io::stdin().read_to_end(&mut buf).map(|_| ())
    } else {
        std::fs::File::open(path).and_then(|mut f| f.read_to_end(&mut buf)).map(|_| ())
    };
    res.map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))?;
    Ok(buf)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// One finite number per line. Line numbers in errors are 1-based.
pub fn parse_values(bytes: &[u8], header: bool) -> Result<Vec<f64>, CliError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        CliError::Input(format!("line {line}: not valid UTF-8"))
    })?;
    let body = text.strip_suffix('\n').unwrap_or(text);
    if body.is_empty() {
        return Ok(Vec::new());
    }
    let mut values = Vec::new();
    for (i, raw) in body.split('\n').enumerate() {
        let lineno = i + 1;
        if header && lineno == 1 {
            continue;
        }
        let line = raw.strip_suffix('\r').unwrap_or(raw).trim();
        if line.is_empty() {
            return Err(CliError::Input(format!("line {lineno}: blank line")));
        }
        let v: f64 = line
            .parse()
            .map_err(|_| CliError::Input(format!("line {lineno}: cannot parse `{line}` as a number")))?;
        if !v.is_finite() {
            return Err(CliError::Input(format!("line {lineno}: value `{line}` is not finite")));
        }
        values.push(v);
    }
    Ok(values)
}
