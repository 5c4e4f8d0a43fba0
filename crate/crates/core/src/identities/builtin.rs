//! Built-in relational identities.
//!
//! Juxtaposition is intersection; `(X)^h` is the `h`-fold composition;
//! `S ∘_m T` alternates `m` factors starting with `S`; `*` is transitive closure.

use super::{Expr, IdentitySpec, Mode, RelClass, VarDecl};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuiltinParams {
    pub h: usize,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    /// Step labels in `{1, 2}` for `malA`.
    pub f: Vec<u8>,
    /// Congruence Θ and unions of two congruences instead of tolerances and
    /// U-admissible relations (the weak form).
    pub weak: bool,
    /// Use the equivalent transitive-closure equality form where one exists.
    pub eq: bool,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        BuiltinParams {
            h: 2,
            k: 2,
            m: 2,
            n: 2,
            f: vec![1, 2],
            weak: false,
            eq: false,
        }
    }
}

pub const BUILTIN_NAMES: &[&str] = &[
    "cdist2", "cdist3", "modular2", "cor1", "cor1p", "cor1pp", "cor2", "cor3", "cor4", "cor4p", "gen1", "gen2",
    "gen3", "maj3", "arith3", "arith4", "baker4", "p12b1", "p12b2", "p12c2", "vrIncl", "malIncl", "malA",
];

fn positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::BadParams(format!("{name} must be ≥ 1")));
    }
    Ok(())
}

fn spec(name: String, vars: Vec<VarDecl>, lhs: Expr, rhs: Expr, mode: Mode) -> IdentitySpec {
    IdentitySpec {
        name: Some(name),
        vars,
        lhs,
        rhs,
        mode,
    }
}

/// `Θ`, `σ`, `τ` for the `cor*` builtins: tolerances and U-admissible
/// relations, or congruences and unions of two congruences in the weak form.
fn cor_vars(weak: bool, with_tau: bool) -> Vec<VarDecl> {
    let (theta, u) = if weak {
        (VarDecl::new("Theta", RelClass::Congruence), RelClass::UnionOfTwoCongruences)
    } else {
        (VarDecl::theta("Theta"), RelClass::UAdmissible)
    };
    let mut vars = vec![theta, VarDecl::new("sigma", u)];
    if with_tau {
        vars.push(VarDecl::new("tau", u));
    }
    vars
}

fn sigma_tau_upsilon(class: RelClass) -> Vec<VarDecl> {
    vec![
        VarDecl::new("sigma", class),
        VarDecl::new("tau", class),
        VarDecl::new("upsilon", class),
    ]
}

pub fn builtin(name: &str, p: &BuiltinParams) -> Result<IdentitySpec> {
    let v = Expr::var;
    let star_eq = |lhs: Expr, rhs: Expr| (lhs.star(), rhs.star(), Mode::Equality);
    let no_eq = |p: &BuiltinParams| -> Result<()> {
        if p.eq {
            return Err(Error::BadParams(format!("{name} has no equality form")));
        }
        Ok(())
    };

    match name {
        // Θ(σ∘σ) ⊆ (Θσ)^h
        "cdist2" => {
            positive("h", p.h)?;
            let vars = vec![VarDecl::theta("Theta"), VarDecl::new("sigma", RelClass::UAdmissible)];
            Ok(spec(
                format!("cdist2(h={})", p.h),
                vars,
                v(0).meet(v(1).then(v(1))),
                v(0).meet(v(1)).pow(p.h),
                Mode::Inclusion,
            ))
        }
        // α(σ∘σ) ⊆ (ασ)^k, σ a union of two congruences
        "cdist3" => {
            positive("k", p.k)?;
            let vars = vec![
                VarDecl::new("alpha", RelClass::Congruence),
                VarDecl::new("sigma", RelClass::UnionOfTwoCongruences),
            ];
            Ok(spec(
                format!("cdist3(k={})", p.k),
                vars,
                v(0).meet(v(1).then(v(1))),
                v(0).meet(v(1)).pow(p.k),
                Mode::Inclusion,
            ))
        }
        // Θ(R∘R) ⊆ (ΘR)^k
        "modular2" => {
            positive("k", p.k)?;
            let vars = vec![VarDecl::theta("Theta"), VarDecl::new("R", RelClass::ReflexiveAdmissible)];
            Ok(spec(
                format!("modular2(k={})", p.k),
                vars,
                v(0).meet(v(1).then(v(1))),
                v(0).meet(v(1)).pow(p.k),
                Mode::Inclusion,
            ))
        }
        // Θ(σ∘σ) ⊆ (Θσ)*, equivalently (Θ(σ∘σ))* = (Θσ)*
        "cor1" => {
            let lhs = v(0).meet(v(1).then(v(1)));
            let rhs = v(0).meet(v(1)).star();
            let (lhs, rhs, mode) = if p.eq {
                star_eq(lhs, v(0).meet(v(1)))
            } else {
                (lhs, rhs, Mode::Inclusion)
            };
            Ok(spec(tagged("cor1", p), cor_vars(p.weak, false), lhs, rhs, mode))
        }
        // Θ(σ∘σ) ⊆ (Θσ ∘ Θσ˘)*
        "cor1p" => {
            no_eq(p)?;
            let lhs = v(0).meet(v(1).then(v(1)));
            let rhs = v(0).meet(v(1)).then(v(0).meet(v(1).conv())).star();
            Ok(spec(
                tagged("cor1p", p),
                cor_vars(p.weak, false),
                lhs,
                rhs,
                Mode::Inclusion,
            ))
        }
        // Θ(σ∘σ˘) ⊆ (Θσ ∘ Θσ˘)*, equivalently with * on the left and equality
        "cor1pp" => {
            let lhs = v(0).meet(v(1).then(v(1).conv()));
            let inner = v(0).meet(v(1)).then(v(0).meet(v(1).conv()));
            let (lhs, rhs, mode) = if p.eq {
                star_eq(lhs, inner)
            } else {
                (lhs, inner.star(), Mode::Inclusion)
            };
            Ok(spec(tagged("cor1pp", p), cor_vars(p.weak, false), lhs, rhs, mode))
        }
        // Θσ* ⊆ (Θσ)*, equivalently (Θσ*)* = (Θσ)*
        "cor2" => {
            let lhs = v(0).meet(v(1).star());
            let (lhs, rhs, mode) = if p.eq {
                star_eq(lhs, v(0).meet(v(1)))
            } else {
                (lhs, v(0).meet(v(1)).star(), Mode::Inclusion)
            };
            Ok(spec(tagged("cor2", p), cor_vars(p.weak, false), lhs, rhs, mode))
        }
        // Θ(σ∘τ) ⊆ (Θσ ∘ Θτ)*
        "cor3" => {
            let lhs = v(0).meet(v(1).then(v(2)));
            let inner = v(0).meet(v(1)).then(v(0).meet(v(2)));
            let (lhs, rhs, mode) = if p.eq {
                star_eq(lhs, inner)
            } else {
                (lhs, inner.star(), Mode::Inclusion)
            };
            Ok(spec(tagged("cor3", p), cor_vars(p.weak, true), lhs, rhs, mode))
        }
        // Θ(σ∘τ)* ⊆ (Θσ ∘ Θτ)*
        "cor4" => {
            let lhs = v(0).meet(v(1).then(v(2)).star());
            let inner = v(0).meet(v(1)).then(v(0).meet(v(2)));
            let (lhs, rhs, mode) = if p.eq {
                star_eq(lhs, inner)
            } else {
                (lhs, inner.star(), Mode::Inclusion)
            };
            Ok(spec(tagged("cor4", p), cor_vars(p.weak, true), lhs, rhs, mode))
        }
        // Θ(σ∘τ)* ⊆ (Θσ ∘ Θτ ∘ Θσ˘ ∘ Θτ˘)*,
        // equivalently (Θ(σ∘τ∘σ˘∘τ˘)*)* = (Θσ ∘ Θτ ∘ Θσ˘ ∘ Θτ˘)*
        "cor4p" => {
            let inner = Expr::chain(vec![
                v(0).meet(v(1)),
                v(0).meet(v(2)),
                v(0).meet(v(1).conv()),
                v(0).meet(v(2).conv()),
            ]);
            let (lhs, rhs, mode) = if p.eq {
                let l = v(0).meet(Expr::chain(vec![v(1), v(2), v(1).conv(), v(2).conv()]).star());
                star_eq(l, inner)
            } else {
                (v(0).meet(v(1).then(v(2)).star()), inner.star(), Mode::Inclusion)
            };
            Ok(spec(tagged("cor4p", p), cor_vars(p.weak, true), lhs, rhs, mode))
        }
        // σ(τ∘υ) ⊆ (στ ∘ συ)*
        "gen1" | "gen2" | "gen3" => {
            let class = if p.weak {
                RelClass::U2Admissible
            } else {
                RelClass::UAdmissible
            };
            let (vars, lhs, rhs, mode) = match name {
                "gen1" => {
                    let lhs = v(0).meet(v(1).then(v(2)));
                    let inner = v(0).meet(v(1)).then(v(0).meet(v(2)));
                    let (l, r, m) = if p.eq {
                        star_eq(lhs, inner)
                    } else {
                        (lhs, inner.star(), Mode::Inclusion)
                    };
                    (sigma_tau_upsilon(class), l, r, m)
                }
                // σ(τ∘τ) ⊆ (στ)*
                "gen2" => {
                    let lhs = v(0).meet(v(1).then(v(1)));
                    let (l, r, m) = if p.eq {
                        star_eq(lhs, v(0).meet(v(1)))
                    } else {
                        (lhs, v(0).meet(v(1)).star(), Mode::Inclusion)
                    };
                    (vec![VarDecl::new("sigma", class), VarDecl::new("tau", class)], l, r, m)
                }
                // σ*τ* = (στ)*, equivalently (σ*τ*)* = (στ)*
                _ => {
                    let lhs = v(0).star().meet(v(1).star());
                    let lhs = if p.eq { lhs.star() } else { lhs };
                    (
                        vec![VarDecl::new("sigma", class), VarDecl::new("tau", class)],
                        lhs,
                        v(0).meet(v(1)).star(),
                        Mode::Equality,
                    )
                }
            };
            Ok(spec(tagged(name, p), vars, lhs, rhs, mode))
        }
        // σ(τ∘υ) ⊆ στ ∘ συ
        "maj3" => {
            no_eq(p)?;
            Ok(spec(
                "maj3".into(),
                sigma_tau_upsilon(RelClass::UAdmissible),
                v(0).meet(v(1).then(v(2))),
                v(0).meet(v(1)).then(v(0).meet(v(2))),
                Mode::Inclusion,
            ))
        }
        // σ(τ∘υ) ⊆ συ ∘ στ
        "arith3" => {
            no_eq(p)?;
            Ok(spec(
                "arith3".into(),
                sigma_tau_upsilon(RelClass::UAdmissible),
                v(0).meet(v(1).then(v(2))),
                v(0).meet(v(2)).then(v(0).meet(v(1))),
                Mode::Inclusion,
            ))
        }
        // T(R∘S) = TR ∘ TS
        "arith4" => {
            no_eq(p)?;
            let vars = vec![
                VarDecl::new("T", RelClass::ReflexiveAdmissible),
                VarDecl::new("R", RelClass::ReflexiveAdmissible),
                VarDecl::new("S", RelClass::ReflexiveAdmissible),
            ];
            Ok(spec(
                "arith4".into(),
                vars,
                v(0).meet(v(1).then(v(2))),
                v(0).meet(v(1)).then(v(0).meet(v(2))),
                Mode::Equality,
            ))
        }
        // σ(τ∘υ) ⊆ στ ∘ συ ∘ στ ∘ συ
        "baker4" => {
            no_eq(p)?;
            Ok(spec(
                "baker4".into(),
                sigma_tau_upsilon(RelClass::UAdmissible),
                v(0).meet(v(1).then(v(2))),
                v(0).meet(v(1)).alt(v(0).meet(v(2)), 4),
                Mode::Inclusion,
            ))
        }
        // Θσ^m ⊆ (Θσ)^(mn−m)
        "p12b1" => {
            positive("m", p.m)?;
            positive("n", p.n)?;
            let h = p.m * p.n - p.m;
            positive("mn−m", h)?;
            let vars = vec![VarDecl::theta("Theta"), VarDecl::new("sigma", RelClass::UAdmissible)];
            Ok(spec(
                format!("p12b1(m={}, n={})", p.m, p.n),
                vars,
                v(0).meet(v(1).pow(p.m)),
                v(0).meet(v(1)).pow(h),
                Mode::Inclusion,
            ))
        }
        // Θ(σ ∘_m τ) ⊆ Θσ ∘_(mn−m) Θτ, m even
        "p12b2" => {
            positive("m", p.m)?;
            positive("n", p.n)?;
            if !p.m.is_multiple_of(2) {
                return Err(Error::BadParams("p12b2 needs an even m".into()));
            }
            let h = p.m * p.n - p.m;
            positive("mn−m", h)?;
            let vars = vec![
                VarDecl::theta("Theta"),
                VarDecl::new("sigma", RelClass::UAdmissible),
                VarDecl::new("tau", RelClass::UAdmissible),
            ];
            Ok(spec(
                format!("p12b2(m={}, n={})", p.m, p.n),
                vars,
                v(0).meet(v(1).alt(v(2), p.m)),
                v(0).meet(v(1)).alt(v(0).meet(v(2)), h),
                Mode::Inclusion,
            ))
        }
        // Θ(σ ∘_m τ) ⊆ (Θσ ∘_m Θτ) ∘_(k−1) (Θτ˘ _m∘ Θσ˘)
        "p12c2" => {
            positive("m", p.m)?;
            if p.k < 2 {
                return Err(Error::BadParams("p12c2 needs k ≥ 2".into()));
            }
            let vars = vec![
                VarDecl::theta("Theta"),
                VarDecl::new("sigma", RelClass::UAdmissible),
                VarDecl::new("tau", RelClass::UAdmissible),
            ];
            let forward = v(0).meet(v(1)).alt(v(0).meet(v(2)), p.m);
            let backward = v(0).meet(v(2).conv()).alt_left(v(0).meet(v(1).conv()), p.m);
            Ok(spec(
                format!("p12c2(m={}, k={})", p.m, p.k),
                vars,
                v(0).meet(v(1).alt(v(2), p.m)),
                forward.alt(backward, p.k - 1),
                Mode::Inclusion,
            ))
        }
        // σ(τ∘υ) ⊆ στ ∘_h συ
        "vrIncl" => {
            positive("h", p.h)?;
            Ok(spec(
                format!("vrIncl(h={})", p.h),
                sigma_tau_upsilon(RelClass::UAdmissible),
                v(0).meet(v(1).then(v(2))),
                v(0).meet(v(1)).alt(v(0).meet(v(2)), p.h),
                Mode::Inclusion,
            ))
        }
        // α(σ∘σ) ⊆ (ασ)^h
        "malIncl" => {
            positive("h", p.h)?;
            let vars = vec![
                VarDecl::new("alpha", RelClass::Congruence),
                VarDecl::new("sigma", RelClass::UAdmissible),
            ];
            Ok(spec(
                format!("malIncl(h={})", p.h),
                vars,
                v(0).meet(v(1).then(v(1))),
                v(0).meet(v(1)).pow(p.h),
                Mode::Inclusion,
            ))
        }
        // α(R1∘R2) ⊆ αR_f(0) ∘ … ∘ αR_f(h−1)
        "malA" => {
            if p.f.is_empty() || p.f.iter().any(|&x| x != 1 && x != 2) {
                return Err(Error::BadParams("f must be a nonempty sequence over {1,2}".into()));
            }
            let vars = vec![
                VarDecl::new("alpha", RelClass::Congruence),
                VarDecl::new("R1", RelClass::ReflexiveAdmissible),
                VarDecl::new("R2", RelClass::ReflexiveAdmissible),
            ];
            let rhs = Expr::chain(p.f.iter().map(|&i| v(0).meet(v(i as usize))).collect());
            let f: Vec<String> = p.f.iter().map(u8::to_string).collect();
            Ok(spec(
                format!("malA(f=({}))", f.join(",")),
                vars,
                v(0).meet(v(1).then(v(2))),
                rhs,
                Mode::Inclusion,
            ))
        }
        _ => Err(Error::UnknownBuiltin(name.into())),
    }
}

fn tagged(name: &str, p: &BuiltinParams) -> String {
    let flags: Vec<&str> = [(p.weak, "weak"), (p.eq, "eq")].into_iter().filter(|f| f.0).map(|f| f.1).collect();
    if flags.is_empty() {
        name.to_string()
    } else {
        format!("{name}({})", flags.join(", "))
    }
}
