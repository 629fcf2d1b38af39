//! Finitely correlated presentations `(d, A_1..A_n, Ω, G)`.
//!
//! Coordinates are taken in a basis `{w_B = π(s_B)*Ω : B ∈ basis}` of the
//! span of the vectors `w_J`, with `G` their Gram matrix, so that
//! `ω(s_J s_K*) = ⟨A_J Ω, A_K Ω⟩_G` and `A_J = A_{j_l} ⋯ A_{j_1}`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{self, adjoint, mat_mul, mat_vec, Mat};
use crate::moments::{level_words, MomentFunctional};
use crate::scalar::{inner, Mode, Scalar, Tol};
use crate::schema::{matrix_json, vector_json};
use crate::words::Word;

#[derive(Clone, Debug)]
pub struct FcsPresentation {
    pub n: usize,
    pub d: usize,
    pub a: Vec<Mat>,
    pub omega: Vec<Scalar>,
    pub metric: Mat,
    /// Words whose vectors form the basis, when extracted from moments.
    pub basis_words: Vec<Word>,
}

impl FcsPresentation {
    /// The one-dimensional presentation of the Cuntz state by `z`.
    pub fn cuntz(z: &[Scalar]) -> Self {
        let mode = crate::scalar::common_mode(z);
        FcsPresentation {
            n: z.len(),
            d: 1,
            a: z.iter().map(|zi| vec![vec![zi.to_mode(mode)]]).collect(),
            omega: vec![Scalar::one(mode)],
            metric: vec![vec![Scalar::one(mode)]],
            basis_words: vec![Word::empty()],
        }
    }

    pub fn mode(&self) -> Mode {
        crate::scalar::common_mode(self.a.iter().flatten().flatten().chain(&self.omega))
    }

    /// `A_J Ω`.
    pub fn orbit_vector(&self, j: &Word) -> Vec<Scalar> {
        j.letters().iter().fold(self.omega.clone(), |v, &c| {
            mat_vec(&self.a[c as usize - 1], &v)
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "A": self.a.iter().map(matrix_json).collect::<Vec<_>>(),
            "omega": vector_json(&self.omega),
            "metric": matrix_json(&self.metric),
            "basis_words": self.basis_words.iter().map(|w| w.letters().to_vec()).collect::<Vec<_>>(),
        })
    }
}

fn g_inner(g: &Mat, u: &[Scalar], v: &[Scalar]) -> Scalar {
    inner(u, &mat_vec(g, v))
}

/// `⟨A_J Ω, A_K Ω⟩_G`.
pub fn fcs_moment(f: &FcsPresentation, j: &Word, k: &Word) -> Scalar {
    g_inner(&f.metric, &f.orbit_vector(j), &f.orbit_vector(k))
}

/// `Σ_i A_i† A_i = I` with `†` the `G`-adjoint, tested as `Σ A_i* G A_i = G`.
pub fn check_row_isometry(f: &FcsPresentation, tol: f64) -> bool {
    let mode = f.mode();
    let mut sum = linalg::zeros(f.d, f.d, mode);
    for a in &f.a {
        let t = mat_mul(&adjoint(a), &mat_mul(&f.metric, a));
        for r in 0..f.d {
            for c in 0..f.d {
                sum[r][c] = sum[r][c].clone() + t[r][c].clone();
            }
        }
    }
    linalg::mat_approx_eq(&sum, &f.metric, tol)
}

/// Dimension of `span{A_J Ω}` and the dimensions `dim S_0, dim S_1, …` of
/// the breadth-first spans until they become stationary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitClosure {
    pub dims: Vec<usize>,
    pub cdim: usize,
}

pub fn orbit_closure_cdim(f: &FcsPresentation, tol: &Tol) -> OrbitClosure {
    let rank = |vs: &Mat| linalg::rref(vs.clone(), tol.rank).1.len();
    let mut span: Mat = vec![f.omega.clone()];
    let mut frontier: Mat = vec![f.omega.clone()];
    let mut dims = vec![rank(&span)];
    loop {
        let mut next = Vec::new();
        for v in &frontier {
            for a in &f.a {
                let w = mat_vec(a, v);
                let mut trial = span.clone();
                trial.push(w.clone());
                if rank(&trial) > rank(&span) {
                    span.push(w.clone());
                    next.push(w);
                }
            }
        }
        let d = rank(&span);
        let prev = *dims.last().expect("nonempty");
        assert!(d >= prev, "span dimension decreased");
        if d == prev {
            break;
        }
        dims.push(d);
        frontier = next;
    }
    let cdim = *dims.last().expect("nonempty");
    OrbitClosure { dims, cdim }
}

/// Ranks of the level Gram matrices `G_L = [ω(s_J s_K*)]_{|J|,|K| ≤ L}`.
#[derive(Clone, Debug)]
pub struct RankProfile {
    /// `ranks[L]` for `L = 0, 1, …` as far as computed.
    pub ranks: Vec<usize>,
    /// First `L` with `rank(L) = rank(L+1)`, if reached.
    pub stable_at: Option<usize>,
    /// Pivot words of the last level computed.
    pub pivots: Vec<Word>,
}

impl RankProfile {
    pub fn last_rank(&self) -> usize {
        *self.ranks.last().unwrap_or(&0)
    }
}

/// Pivoted-Cholesky rank and pivot words of the Gram over words `|J| ≤ level`.
pub fn level_rank(omega: &MomentFunctional, level: usize, tol: &Tol) -> (usize, Vec<Word>) {
    let words = level_words(omega.n(), level);
    let pc = linalg::pivoted_cholesky(
        words.len(),
        |i, j| omega.eval(&words[i], &words[j]),
        omega.mode(),
        tol,
    );
    let piv = pc.pivots.iter().map(|&p| words[p].clone()).collect();
    (pc.rank(), piv)
}

/// Ranks for `L = 0..=max_level`, stopping at the first stabilization.
pub fn rank_profile(omega: &MomentFunctional, max_level: usize, tol: &Tol) -> RankProfile {
    let mut ranks = Vec::new();
    let mut pivots = Vec::new();
    let mut stable_at = None;
    for l in 0..=max_level {
        let (r, p) = level_rank(omega, l, tol);
        if let Some(&prev) = ranks.last() {
            if prev == r {
                stable_at = Some(l - 1);
                ranks.push(r);
                break;
            }
        }
        ranks.push(r);
        pivots = p;
    }
    RankProfile {
        ranks,
        stable_at,
        pivots,
    }
}

#[derive(Clone, Debug)]
pub enum Extraction {
    Presentation {
        fcs: FcsPresentation,
        profile: RankProfile,
    },
    /// The rank did not stabilize by `level`; `rank` bounds cdim from below.
    LowerBoundOnly {
        rank: usize,
        level: usize,
        profile: RankProfile,
    },
}

/// Builds a presentation from the moments when the level ranks stabilize
/// within `max_level`.
pub fn extract_fcs(omega: &MomentFunctional, max_level: usize, tol: &Tol) -> Result<Extraction> {
    let profile = rank_profile(omega, max_level, tol);
    let Some(l) = profile.stable_at else {
        return Ok(Extraction::LowerBoundOnly {
            rank: profile.last_rank(),
            level: max_level,
            profile,
        });
    };
    let fcs = presentation_from_basis(omega, &profile.pivots, tol)?;
    validate(omega, &fcs, l, tol)?;
    Ok(Extraction::Presentation { fcs, profile })
}

fn presentation_from_basis(
    omega: &MomentFunctional,
    basis: &[Word],
    tol: &Tol,
) -> Result<FcsPresentation> {
    let n = omega.n();
    let d = basis.len();
    let metric = omega.gram(basis);
    let coords = |target: &Word| -> Result<Vec<Scalar>> {
        let rhs: Vec<Scalar> = basis.iter().map(|b| omega.eval(b, target)).collect();
        linalg::solve(&metric, &rhs, tol.rank)
            .ok_or_else(|| Error::ValidationFailed("singular basis Gram".into()))
    };
    let omega_vec = coords(&Word::empty())?;
    let mut a = Vec::with_capacity(n);
    for i in 1..=n as u8 {
        let cols: Vec<Vec<Scalar>> = basis
            .iter()
            .map(|b| coords(&b.push(i)))
            .collect::<Result<_>>()?;
        a.push(
            (0..d)
                .map(|r| (0..d).map(|c| cols[c][r].clone()).collect())
                .collect(),
        );
    }
    Ok(FcsPresentation {
        n,
        d,
        a,
        omega: omega_vec,
        metric,
        basis_words: basis.to_vec(),
    })
}

fn validate(omega: &MomentFunctional, f: &FcsPresentation, level: usize, tol: &Tol) -> Result<()> {
    let eps = if omega.mode() == Mode::Exact {
        0.0
    } else {
        tol.eq
    };
    if !check_row_isometry(f, eps) {
        return Err(Error::ValidationFailed("Σ A_i† A_i ≠ I".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let n = omega.n() as u8;
    let max_len = level + 2;
    for _ in 0..20 {
        let word = |rng: &mut ChaCha8Rng| {
            let len = rng.gen_range(0..=max_len);
            Word((0..len).map(|_| rng.gen_range(1..=n)).collect())
        };
        let j = word(&mut rng);
        let k = word(&mut rng);
        if !fcs_moment(f, &j, &k).approx_eq(&omega.eval(&j, &k), eps) {
            return Err(Error::ValidationFailed(format!(
                "moment mismatch at ({j}, {k})"
            )));
        }
    }
    Ok(())
}
