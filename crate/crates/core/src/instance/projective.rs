use super::InstanceError;

/// Vertex set `0..n_vertices` with a list of hyperedges (sorted vertex lists).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    pub n_vertices: usize,
    pub hyperedges: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Number of hyperedges containing each vertex.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_vertices];
        for h in &self.hyperedges {
            for &v in h {
                d[v] += 1;
            }
        }
        d
    }

    pub fn pairwise_intersecting(&self) -> bool {
        let n = self.hyperedges.len();
        (0..n).all(|a| {
            (a + 1..n).all(|b| {
                self.hyperedges[a]
                    .iter()
                    .any(|v| self.hyperedges[b].binary_search(v).is_ok())
            })
        })
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub const MAX_PLANE_ORDER: u64 = 97;

/// Normalized representatives of the projective points over GF(q): nonzero
/// triples whose first nonzero coordinate is 1, in lexicographic order.
fn points(q: u64) -> Vec<[u64; 3]> {
    let mut out = Vec::with_capacity((q * q + q + 1) as usize);
    for y in 0..q {
        for z in 0..q {
            out.push([1, y, z]);
        }
    }
    for z in 0..q {
        out.push([0, 1, z]);
    }
    out.push([0, 0, 1]);
    out
}

/// PG(2, q) for prime `q`. Lines are indexed like points (dual coordinates).
pub fn build_projective_plane(q: u64) -> Result<Hypergraph, InstanceError> {
    if !is_prime(q) {
        return Err(InstanceError::NonPrimeOrder(q));
    }
    if q > MAX_PLANE_ORDER {
        return Err(InstanceError::BadParams(format!(
            "projective plane order {} exceeds {}",
            q, MAX_PLANE_ORDER
        )));
    }
    let pts = points(q);
    let hyperedges = pts
        .iter()
        .map(|l| {
            pts.iter()
                .enumerate()
                .filter(|(_, p)| (l[0] * p[0] + l[1] * p[1] + l[2] * p[2]) % q == 0)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    Ok(Hypergraph {
        n_vertices: pts.len(),
        hyperedges,
    })
}
