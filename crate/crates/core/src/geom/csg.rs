// Boolean composition of signed distance values.
//
// - union:        min(f, g)
// - difference:   max(f, -g)   (f minus g)
// - intersection: max(f, g)

#[inline]
pub fn sdf_union(f: f64, g: f64) -> f64 {
    f.min(g)
}

#[inline]
pub fn sdf_difference(f: f64, g: f64) -> f64 {
    f.max(-g)
}

#[inline]
pub fn sdf_intersection(f: f64, g: f64) -> f64 {
    f.max(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(sdf_union(-0.1, 0.05), -0.1);
        assert_eq!(sdf_difference(-0.1, -0.05), 0.05);
        assert_eq!(sdf_intersection(-0.1, 0.05), 0.05);
    }
}
