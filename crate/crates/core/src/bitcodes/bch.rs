//! Narrow-sense binary BCH codes of length 63 over GF(2^6).

/// x^6 + x + 1
const PRIMITIVE_POLY: u16 = 0b100_0011;
const FIELD_ORDER: usize = 63;

/// GF(2^6) arithmetic via exp/log tables.
struct Gf64 {
    exp: [u8; 2 * FIELD_ORDER],
    log: [u8; 64],
}

impl Gf64 {
    fn new() -> Self {
        let mut exp = [0u8; 2 * FIELD_ORDER];
        let mut log = [0u8; 64];
        let mut x: u16 = 1;
        for i in 0..FIELD_ORDER {
            exp[i] = x as u8;
            exp[i + FIELD_ORDER] = x as u8;
            log[x as usize] = i as u8;
            x <<= 1;
            if x & 0b100_0000 != 0 {
                x ^= PRIMITIVE_POLY;
            }
        }
        Self { exp, log }
    }

    fn mul(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    fn alpha_pow(&self, i: usize) -> u8 {
        self.exp[i % FIELD_ORDER]
    }
}

fn cyclotomic_coset(i: usize) -> Vec<usize> {
    let mut coset = vec![i % FIELD_ORDER];
    let mut j = (2 * i) % FIELD_ORDER;
    while j != coset[0] {
        coset.push(j);
        j = (2 * j) % FIELD_ORDER;
    }
    coset
}

/// Minimal polynomial of α^i over GF(2), coefficients lowest degree first.
fn minimal_polynomial(field: &Gf64, i: usize) -> Vec<u8> {
    // Product of (x + α^j) over the coset, computed in GF(2^6).
    let mut poly: Vec<u8> = vec![1];
    for j in cyclotomic_coset(i) {
        let root = field.alpha_pow(j);
        let mut next = vec![0u8; poly.len() + 1];
        for (d, &c) in poly.iter().enumerate() {
            next[d + 1] ^= c;
            next[d] ^= field.mul(c, root);
        }
        poly = next;
    }
    debug_assert!(poly.iter().all(|&c| c <= 1), "minimal polynomial must be binary");
    poly
}

fn poly_mul_gf2(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] ^= y;
        }
    }
    out
}

/// Generator polynomial (lowest degree first) of the length-63 BCH code with
/// dimension `k`, or `None` if no designed distance yields that dimension.
pub(crate) fn generator_polynomial(k: usize) -> Option<Vec<u8>> {
    if k == 0 || k >= FIELD_ORDER {
        return None;
    }
    let field = Gf64::new();
    let target_degree = FIELD_ORDER - k;
    let mut used = [false; FIELD_ORDER];
    let mut generator: Vec<u8> = vec![1];
    // Designed distance 2t + 1 needs roots α^1 .. α^2t.
    for root in 1..FIELD_ORDER {
        if !used[root] {
            for j in cyclotomic_coset(root) {
                used[j] = true;
            }
            generator = poly_mul_gf2(&generator, &minimal_polynomial(&field, root));
        }
        let degree = generator.len() - 1;
        if degree == target_degree {
            return Some(generator);
        }
        if degree > target_degree {
            return None;
        }
    }
    None
}
