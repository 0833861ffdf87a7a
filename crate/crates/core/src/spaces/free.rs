use super::{Group, PointCode, SpaceError};

/// Free group on `k` letters; elements are reduced words over `a, b, ...`
/// with upper case for inverses.
#[derive(Debug)]
pub(crate) struct Free {
    rank: usize,
    gens: Vec<Vec<u8>>,
}

fn invert_letter(c: u8) -> u8 {
    if c.is_ascii_lowercase() {
        c.to_ascii_uppercase()
    } else {
        c.to_ascii_lowercase()
    }
}

impl Free {
    pub(crate) fn new(rank: usize) -> Self {
        let gens = (0..rank as u8)
            .flat_map(|i| [vec![b'a' + i], vec![b'A' + i]])
            .collect();
        Free { rank, gens }
    }

    fn valid_letter(&self, c: u8) -> bool {
        let lower = c.to_ascii_lowercase();
        c.is_ascii_alphabetic() && ((lower - b'a') as usize) < self.rank
    }

    fn reduce(word: &[u8]) -> Vec<u8> {
        let mut out: Vec<u8> = Vec::with_capacity(word.len());
        for &c in word {
            if out.last() == Some(&invert_letter(c)) {
                out.pop();
            } else {
                out.push(c);
            }
        }
        out
    }
}

impl Group for Free {
    type Elem = Vec<u8>;

    fn identity(&self) -> Vec<u8> {
        Vec::new()
    }

    fn generators(&self) -> &[Vec<u8>] {
        &self.gens
    }

    fn mul(&self, a: &Vec<u8>, b: &Vec<u8>) -> Vec<u8> {
        let mut out = a.clone();
        for &c in b {
            if out.last() == Some(&invert_letter(c)) {
                out.pop();
            } else {
                out.push(c);
            }
        }
        out
    }

    fn inv(&self, a: &Vec<u8>) -> Vec<u8> {
        a.iter().rev().map(|&c| invert_letter(c)).collect()
    }

    fn axis(&self) -> Vec<u8> {
        vec![b'a']
    }

    fn axis_power(&self, a: &Vec<u8>) -> Option<i64> {
        match a.first() {
            None => Some(0),
            Some(&c) if (c == b'a' || c == b'A') && a.iter().all(|&x| x == c) => {
                let n = a.len() as i64;
                Some(if c == b'a' { n } else { -n })
            }
            _ => None,
        }
    }

    fn encode(&self, a: &Vec<u8>) -> PointCode {
        PointCode(a.clone())
    }

    fn decode(&self, p: &PointCode) -> Result<Vec<u8>, SpaceError> {
        let reduced = p.0.windows(2).all(|w| w[0] != invert_letter(w[1]));
        if !reduced || !p.0.iter().all(|&c| self.valid_letter(c)) {
            return Err(SpaceError::MalformedPoint(format!("{p:?}")));
        }
        Ok(p.0.clone())
    }

    fn format(&self, a: &Vec<u8>) -> String {
        if a.is_empty() {
            "1".to_string()
        } else {
            String::from_utf8_lossy(a).into_owned()
        }
    }

    fn parse(&self, s: &str) -> Result<Vec<u8>, SpaceError> {
        let s = s.trim();
        if s == "1" {
            return Ok(Vec::new());
        }
        if s.is_empty() || !s.bytes().all(|c| self.valid_letter(c)) {
            return Err(SpaceError::MalformedPoint(s.to_string()));
        }
        Ok(Free::reduce(s.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_and_inverse() {
        let f = Free::new(2);
        let w = f.parse("abBA").unwrap();
        assert!(w.is_empty());
        let ab = f.parse("ab").unwrap();
        assert_eq!(f.mul(&ab, &f.inv(&ab)), f.identity());
        assert_eq!(f.axis_power(&f.parse("AAA").unwrap()), Some(-3));
        assert_eq!(f.axis_power(&f.parse("ab").unwrap()), None);
        assert!(f.parse("c").is_err());
    }
}
