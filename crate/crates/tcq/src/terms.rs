//! Symbolic sums of oscillating terms `Σ c · e^{i(θt + φ)}`.
//!
//! The exactly reduced generator of the driven model has matrix elements
//! that are finite sums of such terms: products of drive phasors (which
//! carry a drive phase `φ_j` and frequency `Ω_j + ω`) with trigonometric
//! functions of `tg√k` (which contribute symmetric frequency pairs).
//! Keeping the sums symbolic makes the rotating-wave step exact — terms
//! are kept or discarded by their frequency, not fitted numerically.
//!
//! Each term records, besides its numeric frequency and phase, how many
//! units of each drive's phase it carries ([`Term::phase_src`]). That
//! provenance identifies which drive's resonance condition shifts the
//! term's frequency, and two terms are only merged when their provenance
//! agrees, so accidental numerical coincidences between distinct
//! frequency combinations stay separate.

use crate::C64;

/// Maximum number of independent drives a term can reference.
pub const MAX_DRIVES: usize = 3;

/// One oscillating term `amp · e^{i(freq·t + phase)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    /// Complex amplitude `c`.
    pub amp: C64,
    /// Angular frequency `θ`.
    pub freq: f64,
    /// Constant phase `φ` (the drive phases substituted numerically).
    pub phase: f64,
    /// Units of each drive's phase carried by this term; the same counts
    /// give the units of `Ω_j + ω` contained in `freq`.
    pub phase_src: [i8; MAX_DRIVES],
}

impl Term {
    /// Value at time `t`.
    pub fn evaluate(&self, t: f64) -> C64 {
        self.amp * C64::new(0.0, self.freq * t + self.phase).exp()
    }

    /// Complex conjugate term.
    pub fn conj(&self) -> Self {
        let mut src = self.phase_src;
        for s in src.iter_mut() {
            *s = -*s;
        }
        Term {
            amp: self.amp.conj(),
            freq: -self.freq,
            phase: -self.phase,
            phase_src: src,
        }
    }
}

/// A finite sum of oscillating terms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermSum {
    pub terms: Vec<Term>,
}

impl TermSum {
    /// The zero sum.
    pub fn zero() -> Self {
        TermSum { terms: Vec::new() }
    }

    /// A constant (frequency 0, no phase provenance).
    pub fn constant(amp: f64) -> Self {
        if amp == 0.0 {
            return Self::zero();
        }
        TermSum {
            terms: vec![Term {
                amp: C64::new(amp, 0.0),
                freq: 0.0,
                phase: 0.0,
                phase_src: [0; MAX_DRIVES],
            }],
        }
    }

    /// `cos(freq·t) = ½ e^{i freq t} + ½ e^{-i freq t}`.
    pub fn cosine(freq: f64) -> Self {
        let half = C64::new(0.5, 0.0);
        TermSum {
            terms: vec![
                Term {
                    amp: half,
                    freq,
                    phase: 0.0,
                    phase_src: [0; MAX_DRIVES],
                },
                Term {
                    amp: half,
                    freq: -freq,
                    phase: 0.0,
                    phase_src: [0; MAX_DRIVES],
                },
            ],
        }
    }

    /// `sin(freq·t) = -i/2 · e^{i freq t} + i/2 · e^{-i freq t}`.
    pub fn sine(freq: f64) -> Self {
        TermSum {
            terms: vec![
                Term {
                    amp: C64::new(0.0, -0.5),
                    freq,
                    phase: 0.0,
                    phase_src: [0; MAX_DRIVES],
                },
                Term {
                    amp: C64::new(0.0, 0.5),
                    freq: -freq,
                    phase: 0.0,
                    phase_src: [0; MAX_DRIVES],
                },
            ],
        }
    }

    /// Drive phasor `h · e^{i((Ω+ω)t + φ)}` for drive `j` (1-based).
    /// `big_omega` is the shifted frequency `Ω_j + ω` that appears in the
    /// rotated frame.
    pub fn drive_phasor(j: usize, h: f64, big_omega: f64, phi: f64) -> Self {
        assert!(
            (1..=MAX_DRIVES).contains(&j),
            "drive index {j} out of range"
        );
        if h == 0.0 {
            return Self::zero();
        }
        let mut src = [0i8; MAX_DRIVES];
        src[j - 1] = 1;
        TermSum {
            terms: vec![Term {
                amp: C64::new(h, 0.0),
                freq: big_omega,
                phase: phi,
                phase_src: src,
            }],
        }
    }

    /// Sum of two term sums (no merging; call [`TermSum::normalized`]).
    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        TermSum { terms }
    }

    /// Difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Scalar multiple.
    pub fn scale(&self, factor: C64) -> Self {
        TermSum {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    amp: factor * t.amp,
                    ..*t
                })
                .collect(),
        }
    }

    /// Real scalar multiple.
    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// Product (convolution of the term lists: amplitudes multiply,
    /// frequencies, phases and provenance add).
    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut src = a.phase_src;
                for (s, o) in src.iter_mut().zip(b.phase_src.iter()) {
                    *s += o;
                }
                terms.push(Term {
                    amp: a.amp * b.amp,
                    freq: a.freq + b.freq,
                    phase: a.phase + b.phase,
                    phase_src: src,
                });
            }
        }
        TermSum { terms }
    }

    /// Complex conjugate sum.
    pub fn conj(&self) -> Self {
        TermSum {
            terms: self.terms.iter().map(Term::conj).collect(),
        }
    }

    /// Numeric value at time `t`.
    pub fn evaluate(&self, t: f64) -> C64 {
        self.terms
            .iter()
            .fold(C64::new(0.0, 0.0), |acc, term| acc + term.evaluate(t))
    }

    /// Largest term amplitude.
    pub fn max_abs_amp(&self) -> f64 {
        self.terms.iter().fold(0.0f64, |acc, t| acc.max(t.amp.norm()))
    }

    /// Canonical form: terms sorted by provenance then frequency, terms
    /// with equal provenance and frequencies within `eps_freq` merged,
    /// exact zeros dropped.
    pub fn normalized(&self, eps_freq: f64) -> Self {
        let mut terms = self.terms.clone();
        terms.retain(|t| t.amp != C64::new(0.0, 0.0));
        terms.sort_by(|a, b| {
            a.phase_src
                .cmp(&b.phase_src)
                .then(a.freq.partial_cmp(&b.freq).expect("finite frequencies"))
        });
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            if let Some(last) = out.last_mut() {
                if last.phase_src == t.phase_src
                    && (last.freq - t.freq).abs() < eps_freq
                    && (last.phase - t.phase).abs() < 1e-12
                {
                    last.amp += t.amp;
                    continue;
                }
            }
            out.push(t);
        }
        out.retain(|t| t.amp != C64::new(0.0, 0.0));
        TermSum { terms: out }
    }

    /// Number of terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when the sum has no terms.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}
