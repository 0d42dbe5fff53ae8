//! Permutations on {0, .., degree-1}, stored as image vectors.

use crate::error::{Error, Result};

/// `img[i]` is the image of point `i`. Composition is function composition:
/// `(a.mul(&b))` applies `b` first, then `a`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    pub img: Vec<u16>,
}

impl std::fmt::Debug for Perm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.cycle_string())
    }
}

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm { img: (0..degree as u16).collect() }
    }

    /// Validates that `img` is a bijection on 0..degree.
    pub fn from_images(img: Vec<usize>) -> Result<Self> {
        let degree = img.len();
        if degree > u16::MAX as usize {
            return Err(Error::InvalidPermutation(format!("degree {degree} too large")));
        }
        let mut seen = vec![false; degree];
        for &x in &img {
            if x >= degree {
                return Err(Error::InvalidPermutation(format!(
                    "image {x} out of range for degree {degree}"
                )));
            }
            if seen[x] {
                return Err(Error::InvalidPermutation(format!("image {x} repeated")));
            }
            seen[x] = true;
        }
        Ok(Perm { img: img.into_iter().map(|x| x as u16).collect() })
    }

    pub fn degree(&self) -> usize {
        self.img.len()
    }

    #[inline]
    pub fn apply(&self, x: u16) -> u16 {
        self.img[x as usize]
    }

    pub fn mul(&self, other: &Perm) -> Perm {
        assert_eq!(self.degree(), other.degree());
        Perm { img: other.img.iter().map(|&x| self.img[x as usize]).collect() }
    }

    pub fn inv(&self) -> Perm {
        let mut img = vec![0u16; self.degree()];
        for (i, &x) in self.img.iter().enumerate() {
            img[x as usize] = i as u16;
        }
        Perm { img }
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(i, &x)| i as u16 == x)
    }

    pub fn order(&self) -> u64 {
        let mut n = 1u64;
        let mut cur = self.clone();
        while !cur.is_identity() {
            cur = cur.mul(self);
            n += 1;
        }
        n
    }

    pub fn cycle_string(&self) -> String {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = String::new();
        for start in 0..n {
            if seen[start] || self.img[start] as usize == start {
                seen[start] = true;
                continue;
            }
            out.push('(');
            let mut x = start;
            loop {
                seen[x] = true;
                out.push_str(&x.to_string());
                x = self.img[x] as usize;
                if x == start {
                    break;
                }
                out.push(' ');
            }
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_and_invert() {
        let a = Perm::from_images(vec![1, 2, 3, 0]).unwrap(); // 4-cycle
        let b = Perm::from_images(vec![2, 1, 0, 3]).unwrap(); // (0 2)
        // mul applies right factor first
        let ab = a.mul(&b);
        assert_eq!(ab.apply(0), a.apply(b.apply(0)));
        assert_eq!(a.mul(&a.inv()), Perm::identity(4));
        assert_eq!(a.order(), 4);
        assert_eq!(b.order(), 2);
        assert_eq!(a.cycle_string(), "(0 1 2 3)");
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Perm::from_images(vec![0, 0, 1]).is_err());
        assert!(Perm::from_images(vec![0, 3]).is_err());
    }
}
