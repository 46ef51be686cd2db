//! Multi-index helpers: total degree, parity and graded lexicographic
//! enumeration of exponent vectors.

/// Sum of the exponents.
pub fn total_degree(alpha: &[u32]) -> u32 {
    alpha.iter().sum()
}

/// True when some exponent is odd.
pub fn has_odd_component(alpha: &[u32]) -> bool {
    alpha.iter().any(|&a| a % 2 == 1)
}

/// All exponent vectors of length `n` with total degree exactly `degree`,
/// in lexicographic order (`x1^d` first, `xn^d` last).
pub fn monomials_of_degree(n: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if n == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut current = vec![0u32; n];
    fill(&mut current, 0, degree, &mut out);
    out
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.to_vec());
        return;
    }
    for first in (0..=remaining).rev() {
        current[pos] = first;
        fill(current, pos + 1, remaining - first, out);
    }
    current[pos] = 0;
}

/// All exponent vectors of length `n` with total degree `<= max_degree`,
/// graded by degree and lexicographic within a degree.
pub fn monomials_up_to(n: usize, max_degree: u32) -> Vec<Vec<u32>> {
    (0..=max_degree)
        .flat_map(|d| monomials_of_degree(n, d))
        .collect()
}
