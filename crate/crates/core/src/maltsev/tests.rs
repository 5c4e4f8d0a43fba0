use super::*;
use crate::algebra::fixture;

fn ctx(name: &str) -> FreeContext {
    FreeContext::new(&fixture(name).unwrap(), SearchConfig::default()).unwrap()
}

fn cfg() -> CheckConfig {
    CheckConfig::default()
}

fn p() -> BuiltinParams {
    BuiltinParams::default()
}

// table of t(pattern) read straight from a 3-ary table
fn pat(t: &[u8], n: usize, a: usize, b: usize, c: usize) -> u8 {
    t[(a * n + b) * n + c]
}

/// Brute force over all (k−1)-tuples of clone elements for the inner
/// Jónsson terms; `directed` selects the (D) equations.
fn brute_jonsson(c: &TermClone, k: usize, directed: bool) -> bool {
    let n = c.algebra().size();
    let tables: Vec<&[u8]> = c.elements().iter().map(|e| e.table.as_slice()).collect();
    let proj_x = &tables[c.projection(0)];
    let proj_z = &tables[c.projection(2)];
    let inner: Vec<usize> = (0..tables.len())
        .filter(|&i| (0..n).all(|a| (0..n).all(|b| pat(tables[i], n, a, b, a) == a as u8)))
        .collect();
    let mut idx = vec![0usize; k.saturating_sub(1)];
    loop {
        let mut chain: Vec<&[u8]> = vec![proj_x];
        chain.extend(idx.iter().map(|&i| tables[inner[i]]));
        chain.push(proj_z);
        let ok = (0..k).all(|i| {
            (0..n).all(|a| {
                (0..n).all(|c| {
                    if directed {
                        pat(chain[i], n, a, c, c) == pat(chain[i + 1], n, a, a, c)
                    } else if i % 2 == 0 {
                        pat(chain[i], n, a, a, c) == pat(chain[i + 1], n, a, a, c)
                    } else {
                        pat(chain[i], n, a, c, c) == pat(chain[i + 1], n, a, c, c)
                    }
                })
            })
        });
        if ok {
            return true;
        }
        let mut p = idx.len();
        loop {
            if p == 0 {
                return false;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < inner.len() {
                break;
            }
            idx[p] = 0;
        }
    }
}

fn least_brute(c: &TermClone, max: usize, directed: bool) -> Option<usize> {
    (1..=max).find(|&k| brute_jonsson(c, k, directed))
}

#[test]
fn lattice2_ladder() {
    let c = ctx("lattice2");
    let a = c.algebra().clone();
    let m = c.find_majority();
    assert!(m.found().unwrap().verify(&a).unwrap());
    let j = c.find_jonsson(DEFAULT_BOUND);
    let j = j.found().unwrap();
    assert_eq!(j.schema, Schema::Jonsson { k: 2 });
    assert!(j.verify(&a).unwrap());
    // j_1 is the majority operation
    let maj: Term = "join(join(meet(x,y),meet(x,z)),meet(y,z))".parse().unwrap();
    assert_eq!(a.term_table(j.term("j1").unwrap(), 3).unwrap(), a.term_table(&maj, 3).unwrap());
    let d = c.find_directed(DEFAULT_BOUND);
    assert_eq!(d.found().unwrap().schema, Schema::DirectedJonsson { n: 2 });
    assert!(d.found().unwrap().verify(&a).unwrap());
    assert!(c.find_pixley().is_absent());
}

#[test]
fn z2_ladder_is_empty() {
    let c = ctx("z2");
    assert!(c.find_majority().is_absent());
    assert!(c.find_jonsson(6).is_absent());
    assert!(c.find_directed(6).is_absent());
    assert!(c.find_pixley().is_absent());
}

#[test]
fn boolean_algebra_has_majority_and_pixley() {
    let c = ctx("boolean2");
    let a = c.algebra().clone();
    for s in [c.find_majority(), c.find_pixley()] {
        assert!(s.found().unwrap().verify(&a).unwrap());
    }
    let p = c.find_pixley();
    let sys = p.found().unwrap();
    let report = sys.report();
    assert_eq!(replay_certificate(&a, &report.certificate).unwrap(), None);
}

#[test]
fn jonsson_levels_match_brute_force() {
    for (name, max) in [("lattice2", 4), ("baker4", 5), ("z2", 4), ("lattice_2x2", 3)] {
        let c = ctx(name);
        let found = match c.find_jonsson(max) {
            Search::Found(s) => match s.schema {
                Schema::Jonsson { k } => Some(k),
                _ => unreachable!(),
            },
            Search::Absent => None,
            Search::Inconclusive(e) => panic!("{e}"),
        };
        assert_eq!(found, least_brute(c.clone3(), max, false), "{name}");
        let directed = match c.find_directed(max) {
            Search::Found(s) => match s.schema {
                Schema::DirectedJonsson { n } => Some(n),
                _ => unreachable!(),
            },
            _ => None,
        };
        assert_eq!(directed, least_brute(c.clone3(), max, true), "{name} directed");
    }
}

#[test]
fn baker_reduct_is_four_distributive() {
    let c = ctx("baker4");
    let j = c.find_jonsson(DEFAULT_BOUND);
    let j = j.found().unwrap();
    assert_eq!(j.schema, Schema::Jonsson { k: 4 });
    assert!(j.verify(c.algebra()).unwrap());
}

#[test]
fn vr_and_mal_systems_on_lattice2() {
    let c = ctx("lattice2");
    let a = c.algebra().clone();
    let vr = c.find_vr(2);
    let vr = vr.found().unwrap();
    assert!(vr.verify(&a).unwrap());
    assert_eq!(replay_certificate(&a, &vr.report().certificate).unwrap(), None);
    let mal = c.find_mal_f(2);
    let mal = mal.found().unwrap();
    assert_eq!(mal.schema, Schema::MalF { h: 2, f: vec![1, 2] });
    assert!(mal.verify(&a).unwrap());
    // h = 1 would need x αR z directly
    assert!(c.find_vr(1).is_absent());
    assert!(c.find_mal_f(1).is_absent());
}

#[test]
fn vr_and_mal_absent_on_z2() {
    let c = ctx("z2");
    for h in 1..=6 {
        assert!(c.find_vr(h).is_absent(), "h={h}");
        assert!(c.find_mal_f(h).is_absent(), "h={h}");
    }
}

#[test]
fn found_systems_imply_their_identities() {
    let cfg = cfg();
    for name in ["lattice2", "baker4", "lattice_2x2"] {
        let c = ctx(name);
        let a = c.algebra().clone();
        for h in 2..=4 {
            if c.find_vr(h).found().is_some() {
                let spec = builtin("vrIncl", &BuiltinParams { h, ..p() }).unwrap();
                assert!(check_for_all(&a, &spec, &cfg).unwrap().holds(), "{name} vr h={h}");
            }
            if let Search::Found(sys) = c.find_mal_f(h) {
                let Schema::MalF { f, .. } = &sys.schema else { unreachable!() };
                let spec = builtin("malA", &BuiltinParams { f: f.clone(), ..p() }).unwrap();
                assert!(check_for_all(&a, &spec, &cfg).unwrap().holds(), "{name} malA");
                let spec = builtin("malIncl", &BuiltinParams { h, ..p() }).unwrap();
                assert!(check_for_all(&a, &spec, &cfg).unwrap().holds(), "{name} malIncl h={h}");
            }
        }
        if let Search::Found(sys) = c.find_directed(4) {
            let Schema::DirectedJonsson { n } = sys.schema else { unreachable!() };
            let spec = builtin("cdist2", &BuiltinParams { h: 2 * n - 2, ..p() }).unwrap();
            let cfg = CheckConfig { theta_as_congruence: false, ..cfg.clone() };
            assert!(check_for_all(&a, &spec, &cfg).unwrap().holds(), "{name} cdist2");
        }
        if c.find_majority().found().is_some() {
            assert!(check_for_all(&a, &builtin("maj3", &p()).unwrap(), &cfg).unwrap().holds());
        }
    }
}

#[test]
fn dichotomy() {
    let d = ctx("lattice2").slmore(2).unwrap();
    assert!(d.left || d.right);
    assert_ne!(d.outcome, DichotomySide::Neither);
    for k in 1..=6 {
        assert_eq!(ctx("z2").slmore(k).unwrap().outcome, DichotomySide::Neither);
    }
}

#[test]
fn variations() {
    assert_eq!(variation_count(&[1, 2, 1]), 2);
    assert_eq!(variation_count(&[1, 1, 1]), 0);
    assert_eq!(variation_count(&[]), 0);
}

#[test]
fn implication_experiment_reports_observations() {
    let a = fixture("lattice2").unwrap();
    let r = mal_implication_experiment(&a, &[1, 2], &[2, 1], &cfg()).unwrap();
    assert_eq!(r.variations, (1, 1));
    assert_eq!(r.holds_f, Status::Holds);
    assert!(!r.observation.is_empty());
}

#[test]
fn malincl_expansions_are_the_four_maps() {
    let spec = builtin("malIncl", &p()).unwrap();
    let exps = enumerate_expansions(&spec).unwrap();
    assert_eq!(exps.len(), 4);
    let maps: Vec<Vec<usize>> = exps.iter().map(|e| e.rhs_map.clone()).collect();
    assert_eq!(maps, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    // the (1,2) map is malA(f = (1,2)) up to renaming
    let mal_a = builtin("malA", &p()).unwrap();
    assert_eq!(exps[1].spec.lhs, mal_a.lhs);
    assert_eq!(exps[1].spec.rhs, mal_a.rhs);
    for e in &exps {
        assert_eq!(e.spec.vars.len(), 3);
        assert_eq!(e.spec.vars[0].class, RelClass::Congruence);
        assert!(e.spec.vars[1..].iter().all(|d| d.class == RelClass::ReflexiveAdmissible));
        let mut occ = Vec::new();
        e.spec.lhs.occurrences(&mut occ);
        let mut copies: Vec<_> = occ.into_iter().filter(|&v| v > 0).collect();
        copies.sort();
        assert_eq!(copies, vec![1, 2], "each copy once on the left");
    }
}

#[test]
fn single_occurrence_has_one_expansion() {
    let spec = IdentitySpec::parse("uadm:s & cong:a <= uadm:s ; uadm:s").unwrap();
    let exps = enumerate_expansions(&spec).unwrap();
    assert_eq!(exps.len(), 1);
    assert_eq!(exps[0].spec.to_string(), "adm:s_1 & cong:a <= adm:s_1 ; adm:s_1");
}

#[test]
fn forbidden_operators() {
    for text in ["uadm:s^* <= uadm:s", "uadm:s <= uadm:s | uadm:s", "uadm:s <= bar(uadm:s)"] {
        let spec = IdentitySpec::parse(text).unwrap();
        assert!(matches!(enumerate_expansions(&spec), Err(Error::ForbiddenOperator(_))), "{text}");
    }
}

#[test]
fn expansion_verdict_agrees_with_u_verdict() {
    let spec = builtin("malIncl", &p()).unwrap();
    for name in ["lattice2", "z2"] {
        let r = check_any_expansion(&fixture(name).unwrap(), &spec, &cfg()).unwrap();
        assert!(r.agree, "{name}");
        assert_eq!(r.any_status, Status::Holds);
    }
}

#[test]
fn principal_seeds_on_the_free_algebra() {
    let l = ctx("lattice2");
    let z = ctx("z2");
    let cfg = cfg();
    for b in ["cdist2", "maj3"] {
        let spec = builtin(b, &p()).unwrap();
        assert!(l.principal_verdict(&spec, &cfg).unwrap(), "{b}");
        assert!(!z.principal_verdict(&spec, &cfg).unwrap(), "{b}");
    }
    let spec = builtin("gen3", &p()).unwrap();
    assert!(l.principal_verdict(&spec, &cfg).is_err());
}

#[test]
fn baker_chain_validates() {
    let a = fixture("baker4").unwrap();
    let chain: Vec<Term> = ["x", "f(x,y,z)", "f(x,z,z)", "f(z,y,x)", "z"].iter().map(|t| t.parse().unwrap()).collect();
    let cfg = cfg();
    let mut pool = crate::identities::CandidatePool::new(&a, &cfg);
    let (fams, _) = pool.families(RelClass::U2Admissible);
    let rels: Vec<&BinRel> = fams.iter().map(|f| f.union_view()).collect();
    for s in &rels {
        for t in &rels {
            for u in &rels {
                let st = s.intersect(t).unwrap();
                let su = s.intersect(u).unwrap();
                let steps = [&st, &su, &st, &su];
                assert!(validate_chain(&a, &chain, &steps, s, t, u).unwrap());
            }
        }
    }
}

#[test]
fn certificates_detect_tampering() {
    let c = ctx("lattice2");
    let a = c.algebra().clone();
    let mut r = c.find_jonsson(4).found().unwrap().report();
    assert_eq!(replay_certificate(&a, &r.certificate).unwrap(), None);
    r.certificate.push("meet(x,y) = x".into());
    assert_eq!(replay_certificate(&a, &r.certificate).unwrap().as_deref(), Some("meet(x,y) = x"));
    assert!(check_equation_text(&a, "x == y").is_err());
}
