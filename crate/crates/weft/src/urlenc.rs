//! Form encoding as used in list files and query strings.
//!
//! The alphabet is fixed: space becomes `+`; ASCII alphanumerics and
//! `- _ . ! , * ( )` pass through; every other byte of the UTF-8 encoding
//! becomes `%HH` with uppercase hex. Decoding reverses this permissively: a
//! `%` not followed by two hex digits stays a literal `%`.

/// Encodes one name or value for a query string.
pub fn form_encode(input: &str) -> String {
    let mut out = String::with_capacity(input.len());
    for &byte in input.as_bytes() {
        match byte {
            b' ' => out.push('+'),
            b'A'..=b'Z'
            | b'a'..=b'z'
            | b'0'..=b'9'
            | b'-'
            | b'_'
            | b'.'
            | b'!'
            | b','
            | b'*'
            | b'('
            | b')' => out.push(byte as char),
            _ => out.push_str(&format!("%{byte:02X}")),
        }
    }
    out
}

/// Decodes `+` to space and `%HH` escapes to bytes. Malformed escapes are
/// kept literally; byte sequences that are not UTF-8 are replaced lossily.
pub fn form_decode(input: &str) -> String {
    let bytes = input.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'+' => {
                out.push(b' ');
                i += 1;
            }
            b'%' if i + 2 < bytes.len() => match hex_pair(bytes[i + 1], bytes[i + 2]) {
                Some(byte) => {
                    out.push(byte);
                    i += 3;
                }
                None => {
                    out.push(b'%');
                    i += 1;
                }
            },
            byte => {
                out.push(byte);
                i += 1;
            }
        }
    }
    String::from_utf8_lossy(&out).into_owned()
}

fn hex_pair(high: u8, low: u8) -> Option<u8> {
    let h = (high as char).to_digit(16)?;
    let l = (low as char).to_digit(16)?;
    Some((h * 16 + l) as u8)
}

/// Splits `name=value&name=value` data into decoded pairs, in order.
/// A segment without `=` decodes as a name bound to the empty string;
/// empty segments are skipped.
pub fn parse_pairs(input: &str) -> Vec<(String, String)> {
    input
        .split('&')
        .filter(|segment| !segment.is_empty())
        .map(|segment| match segment.find('=') {
            Some(at) => (form_decode(&segment[..at]), form_decode(&segment[at + 1..])),
            None => (form_decode(segment), String::new()),
        })
        .collect()
}
