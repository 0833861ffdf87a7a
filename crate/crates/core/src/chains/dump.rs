use std::fmt::Write as _;

use super::{format_rational, parse_rational, Chain, ChainError};
use crate::spaces::Space;

/// A chain together with the header fields of its text dump.
#[derive(Clone, Debug)]
pub struct ChainDump {
    pub space: Space,
    pub radius: u32,
    pub chain: Chain,
}

/// Text form: a `#space=<spec> dim=<n> radius=<R>` header, then one simplex
/// per line as `<pt> [<pt> ...] <num>/<den>`, in stored order. Later lines
/// starting with `#` are comments.
pub fn write_dump(space: &Space, radius: u32, chain: &Chain) -> Result<String, ChainError> {
    let mut out = format!("#space={} dim={} radius={}\n", space.descriptor(), chain.dim(), radius);
    for (s, c) in chain.iter() {
        for v in s.vertices() {
            out.push_str(&space.format_point(v)?);
            out.push(' ');
        }
        writeln!(out, "{}", format_rational(c)).unwrap();
    }
    Ok(out)
}

pub fn parse_dump(text: &str) -> Result<ChainDump, ChainError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(ChainError::Dump { line: 1, reason: "empty input".into() })?;
    let bad_header = |reason: &str| ChainError::Dump { line: 1, reason: reason.to_string() };
    let header = header.trim().strip_prefix('#').ok_or_else(|| bad_header("missing `#` header"))?;
    let (mut space, mut dim, mut radius) = (None, None, None);
    for field in header.split_whitespace() {
        match field.split_once('=') {
            Some(("space", v)) => space = Some(Space::parse(v)?),
            Some(("dim", v)) => dim = Some(v.parse::<usize>().map_err(|_| bad_header("bad dim"))?),
            Some(("radius", v)) => radius = Some(v.parse::<u32>().map_err(|_| bad_header("bad radius"))?),
            _ => return Err(bad_header(&format!("unknown header field `{field}`"))),
        }
    }
    let space = space.ok_or_else(|| bad_header("missing space"))?;
    let dim = dim.ok_or_else(|| bad_header("missing dim"))?;
    let radius = radius.ok_or_else(|| bad_header("missing radius"))?;
    let mut chain = Chain::new(dim)?;
    for (i, line) in lines {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let bad = |reason: String| ChainError::Dump { line: i + 1, reason };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != dim + 2 {
            return Err(bad(format!("expected {} points and a coefficient", dim + 1)));
        }
        let coeff = parse_rational(tokens[dim + 1]).ok_or_else(|| bad("bad coefficient".into()))?;
        let vertices = tokens[..=dim]
            .iter()
            .map(|t| space.parse_point(t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(e.to_string()))?;
        chain.add(vertices, coeff)?;
    }
    Ok(ChainDump { space, radius, chain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::{rat, ratio};

    #[test]
    fn round_trip() {
        for (spec, a, b) in [("zd:2", "0,0", "1,0"), ("lamp:2", "0,0|", "0,0|0,0"), ("free:2", "1", "a"), ("bs:1:2", "0|1/2", "0|3/2")] {
            let s = Space::parse(spec).unwrap();
            let mut c = Chain::new(1).unwrap();
            c.add(vec![s.parse_point(a).unwrap(), s.parse_point(b).unwrap()], ratio(-7, 3)).unwrap();
            let text = write_dump(&s, 4, &c).unwrap();
            assert!(text.starts_with(&format!("#space={spec} dim=1 radius=4\n")));
            let back = parse_dump(&text).unwrap();
            assert_eq!(back.chain, c);
            assert_eq!(back.radius, 4);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_dump("").is_err());
        assert!(parse_dump("#space=zd:1 dim=0 radius=2\n1 2 3\n").is_err());
        assert!(parse_dump("#space=zd:1 dim=0\n").is_err());
        let d = parse_dump("#space=zd:1 dim=0 radius=2\n1 2\n-1 1/2\n").unwrap();
        assert_eq!(d.chain.value(&d.space.parse_point("1").unwrap()), rat(2));
    }
}
