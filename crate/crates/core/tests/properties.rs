use abmod::algebra::default_a_degree_bound;
use abmod::decomposition::{
    filtration_layer, higher_bernstein, is_semisimple, semisimple_filtration,
};
use abmod::fresco::{
    fresco_from_presentation, generated_submodule, jh_split, Fresco, FrescoPresentation,
};
use abmod::gauss_manin::{embed_into_xi, from_differential_system, realize_expansion, DiffSystem};
use abmod::linalg::QMatrix;
use abmod::saturation::{bernstein_of_saturated, bernstein_polynomial, saturate};
use abmod::scalar::{int, rat};
use abmod::{
    build_xi_tensor, AbError, AbModule, AbOperator, BernsteinMode, Generator, Lattice,
    ModuleElement, Polynomial, Rational, TruncSeries, XiLayout,
};
use proptest::prelude::*;

const P: usize = 10;

fn rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| rat(p, q))
}

fn positive() -> impl Strategy<Value = Rational> {
    (1i64..=9, 1i64..=3).prop_map(|(p, q)| rat(p, q))
}

fn series(prec: usize) -> impl Strategy<Value = TruncSeries> {
    prop::collection::vec(rational(), 0..6).prop_map(move |c| TruncSeries::from_poly(&c, prec))
}

fn unit(prec: usize) -> impl Strategy<Value = TruncSeries> {
    (positive(), prop::collection::vec(rational(), 0..5)).prop_map(move |(c0, rest)| {
        let mut c = vec![c0];
        c.extend(rest);
        TruncSeries::from_poly(&c, prec)
    })
}

fn element(rank: usize, prec: usize) -> impl Strategy<Value = ModuleElement> {
    prop::collection::vec(series(prec), rank).prop_map(ModuleElement::new)
}

/// Presentations whose formula roots `-(lambda_j + j - k)` are all negative.
fn geometric_lambdas(max_rank: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(positive(), 1..=max_rank).prop_map(|r| {
        let k = r.len();
        r.into_iter()
            .enumerate()
            .map(|(i, x)| x + int((k - i - 1) as i64))
            .collect()
    })
}

/// Precision that covers the resonances between formula roots.
fn budget(lambdas: &[Rational]) -> usize {
    let k = lambdas.len();
    let roots: Vec<Rational> = lambdas
        .iter()
        .enumerate()
        .map(|(j, l)| l + int(j as i64 + 1 - k as i64))
        .collect();
    let hi = roots.iter().max().unwrap();
    let lo = roots.iter().min().unwrap();
    let spread = (hi - lo).ceil().to_integer();
    10 + 2 * spread.try_into().unwrap_or(0usize)
}

fn fresco(lambdas: &[Rational], prec: usize) -> Fresco {
    fresco_from_presentation(&FrescoPresentation::from_lambdas(lambdas), prec).unwrap()
}

fn operator(prec: usize) -> impl Strategy<Value = AbOperator> {
    prop::collection::vec((0usize..3, prop::collection::vec(rational(), 1..3)), 1..4)
        .prop_map(move |t| AbOperator::from_terms(&t, prec, default_a_degree_bound(3)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn series_ring_axioms(x in series(P), y in series(P - 2), z in series(P)) {
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert_eq!(x.mul(&y).prec(), P - 2);
    }

    #[test]
    fn series_inverse(u in unit(P)) {
        let inv = u.invert().unwrap();
        prop_assert_eq!(u.mul(&inv), TruncSeries::one(P));
    }

    #[test]
    fn leibniz(x in series(P), y in series(P)) {
        let lhs = x.mul(&y).derivative();
        let rhs = x.derivative().mul(&y).add(&x.mul(&y.derivative()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn valuation_adds(x in series(P), y in series(P)) {
        if let (Some(vx), Some(vy)) = (x.valuation(), y.valuation()) {
            if vx + vy < P {
                prop_assert_eq!(x.mul(&y).valuation(), Some(vx + vy));
            }
        }
    }

    #[test]
    fn operator_associativity(x in operator(P), y in operator(P), z in operator(P)) {
        let left = x.mul(&y).and_then(|xy| xy.mul(&z));
        let right = y.mul(&z).and_then(|yz| x.mul(&yz));
        if let (Ok(l), Ok(r)) = (left, right) {
            prop_assert_eq!(l, r);
        }
    }

    #[test]
    fn normal_forms_are_fixed(x in operator(P)) {
        let one = AbOperator::one(P, default_a_degree_bound(3));
        prop_assert_eq!(x.mul(&one).unwrap(), x.clone());
        prop_assert_eq!(one.mul(&x).unwrap(), x);
    }

    #[test]
    fn action_is_a_homomorphism(x in operator(P), y in operator(P), v in element(3, P)) {
        let xi = build_xi_tensor(&[rat(1, 2)], 2, 1, P).unwrap();
        if let Ok(xy) = x.mul(&y) {
            let lhs = xi.act(&xy, &v).unwrap();
            let rhs = xi.act(&x, &xi.act(&y, &v).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn twist_identity(
        entries in prop::collection::vec(series(P), 4),
        s in series(P),
        x in element(2, P),
    ) {
        let mat = vec![
            vec![entries[0].mul_b_pow(1), entries[1].mul_b_pow(1)],
            vec![entries[2].mul_b_pow(1), entries[3].mul_b_pow(1)],
        ];
        let e = AbModule::from_matrix(mat).unwrap();
        let lhs = e.apply_a(&x.mul_series(&s)).unwrap();
        let rhs = e
            .apply_a(&x)
            .unwrap()
            .mul_series(&s)
            .add(&x.mul_series(&s.derivative().mul_b_pow(2)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bernstein_of_e_lambda(l in rational()) {
        let b = bernstein_polynomial(&AbModule::e_lambda(&l, P), BernsteinMode::Minimal, &[], None).unwrap();
        prop_assert_eq!(b.poly, Polynomial::linear(&-l));
    }

    #[test]
    fn normal_hull_is_normal(gens in prop::collection::vec(element(3, P), 1..3)) {
        let l = Lattice::reduce(3, &gens).unwrap();
        let h = l.normal_hull().unwrap();
        // normal iff the basis stays independent modulo b
        let rows: Vec<Vec<Rational>> = h.basis().iter().map(|g| g.coeff_vector(0)).collect();
        if !rows.is_empty() {
            prop_assert_eq!(QMatrix::from_rows(rows).rank(), h.rank());
        }
        prop_assert_eq!(h.rank(), l.rank());
        for g in l.basis() {
            prop_assert!(h.contains(g).unwrap());
        }
    }

    #[test]
    fn realization_intertwines(v in element(3, 12)) {
        let layout = XiLayout::new(vec![rat(1, 3)], 2, 1).unwrap();
        let xi = layout.build(12);
        let order = 8;
        let ax = realize_expansion(&layout, &xi.apply_a(&v).unwrap(), order);
        prop_assert_eq!(ax, realize_expansion(&layout, &v, order).mul_s().truncate(order));
        let bx = realize_expansion(&layout, &v.mul_b_pow(1), order);
        prop_assert_eq!(bx, realize_expansion(&layout, &v, order).integrate().truncate(order));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn saturation_is_idempotent(lambdas in geometric_lambdas(3)) {
        let f = fresco(&lambdas, budget(&lambdas));
        let sat = saturate(&f.module, None).unwrap();
        let again = saturate(&sat.module, None).unwrap();
        prop_assert_eq!(again.iterations, 0);
        prop_assert_eq!(again.shift, 0);
        for i in 0..f.rank() {
            let back = sat.pull_back_scaled(&sat.include(&f.module.basis(i)));
            prop_assert_eq!(back, f.module.basis(i).mul_b_pow(sat.shift));
        }
        let b1 = bernstein_of_saturated(&sat.module, BernsteinMode::Characteristic, &[]);
        let b2 = bernstein_of_saturated(&again.module, BernsteinMode::Characteristic, &[]);
        prop_assert_eq!(b1.poly, b2.poly);
    }

    #[test]
    fn fresco_degree_is_rank(lambdas in geometric_lambdas(3)) {
        let f = fresco(&lambdas, budget(&lambdas));
        let b = bernstein_polynomial(&f.module, BernsteinMode::Characteristic, &[], None).unwrap();
        prop_assert_eq!(b.degree(), lambdas.len());
    }

    #[test]
    fn generated_by_the_generator(lambdas in geometric_lambdas(3)) {
        let f = fresco(&lambdas, budget(&lambdas));
        let g = generated_submodule(&f.module, &f.generator).unwrap();
        prop_assert_eq!(g.rank(), f.rank());
        prop_assert!(g.left_form.is_some());
        let b = |e: &AbModule| bernstein_polynomial(e, BernsteinMode::Characteristic, &[], None).unwrap().poly;
        prop_assert_eq!(b(&g.module), b(&f.module));
    }

    #[test]
    fn jh_ranks_add_up(lambdas in geometric_lambdas(3), x in element(3, 40)) {
        let f = fresco(&lambdas, budget(&lambdas));
        let x = ModuleElement::new(x.coords[..f.rank()].to_vec());
        if x.is_zero() {
            return Ok(());
        }
        if let Ok(split) = jh_split(&f, &x, None) {
            let q = split.quot.as_ref().map_or(0, |q| q.rank());
            prop_assert_eq!(split.sub.rank() + q, f.rank());
            prop_assert!(split.report.minus_variant);
        }
    }

    #[test]
    fn filtration_shape(lambdas in geometric_lambdas(3)) {
        let f = fresco(&lambdas, budget(&lambdas));
        let e = &f.module;
        let filt = semisimple_filtration(e, None).unwrap();
        let ranks = filt.ranks();
        prop_assert!(ranks.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(*ranks.last().unwrap(), e.rank());
        for (j, s) in filt.steps.iter().enumerate() {
            prop_assert!(s.is_normal());
            prop_assert!(s.is_a_stable(e).unwrap());
            let layer = filtration_layer(e, &filt, j).unwrap();
            match is_semisimple(&layer, None) {
                Ok(ss) => prop_assert!(ss),
                Err(AbError::PrecisionExhausted(_)) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }

    #[test]
    fn product_theorem(lambdas in geometric_lambdas(3)) {
        let f = fresco(&lambdas, budget(&lambdas));
        let h = higher_bernstein(&f.module, None).unwrap();
        let product = h.assembled.iter().fold(Polynomial::one(), |acc, b| acc.mul(&b.poly));
        let bf = bernstein_polynomial(&f.module, BernsteinMode::Characteristic, &[], None).unwrap();
        prop_assert_eq!(product, bf.poly);
        for b in &h.assembled {
            prop_assert!(b.has_simple_roots());
        }
        prop_assert!(h.assembled.windows(2).all(|w| w[0].degree() >= w[1].degree()));
    }

    #[test]
    fn differential_system_fixed_point(
        a0 in prop::collection::vec(rational(), 4),
        a1 in prop::collection::vec(rational(), 4),
    ) {
        let p = 8;
        let entries = (0..2)
            .map(|i| (0..2).map(|j| vec![a0[2 * i + j].clone(), a1[2 * i + j].clone()]).collect())
            .collect();
        let sys = DiffSystem::new(entries).unwrap();
        let e = from_differential_system(&sys, p).unwrap();
        prop_assert!(e.is_simple_pole());
        // a e_j = sum_n sum_i (A_n)_ij b (a + b)^n e_i
        for j in 0..2 {
            let mut rhs = ModuleElement::zero(2, p);
            for i in 0..2 {
                let mut pow = e.basis(i);
                for n in 0..=1 {
                    rhs = rhs.add(&pow.mul_b_pow(1).scale(&sys.coefficient(n).row(i)[j]));
                    pow = e.apply_a(&pow).unwrap().add(&e.apply_b(&pow).unwrap());
                }
            }
            prop_assert_eq!(e.a_column(j), rhs);
        }
    }

    #[test]
    fn diagonal_systems(d in prop::collection::vec(rational(), 1..4)) {
        let k = d.len();
        let entries = (0..k)
            .map(|i| (0..k).map(|j| vec![if i == j { d[i].clone() } else { int(0) }]).collect())
            .collect();
        let e = from_differential_system(&DiffSystem::new(entries).unwrap(), 8).unwrap();
        let b = bernstein_polynomial(&e, BernsteinMode::Characteristic, &[], None).unwrap();
        let mut want: Vec<Rational> = d.iter().map(|x| -x.clone()).collect();
        want.sort();
        let mut got: Vec<Rational> = b.roots.iter().flat_map(|(r, m)| std::iter::repeat_n(r.clone(), *m)).collect();
        got.sort();
        prop_assert_eq!(got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn embeddings_are_equivariant(lambdas in geometric_lambdas(2), seed in 0u64..1000) {
        // reducing the image costs up to the root spread in precision
        let f = fresco(&lambdas, budget(&lambdas) + 8);
        let e = &f.module;
        let emb = embed_into_xi(e, seed, None).unwrap();
        prop_assert!(emb.check_equivariance(e).unwrap());
        for j in 0..e.rank() {
            prop_assert_eq!(emb.apply(&e.basis(j).mul_b_pow(1)), emb.apply(&e.basis(j)).mul_b_pow(1));
        }
        let image = Lattice::reduce(emb.target.rank(), &emb.images).unwrap();
        prop_assert_eq!(image.rank(), e.rank());
        let m = image.as_module(&emb.target).unwrap();
        let b = |x: &AbModule| bernstein_polynomial(x, BernsteinMode::Characteristic, &[], None).unwrap().poly;
        prop_assert_eq!(b(&m), b(e));
    }
}

#[test]
fn commutation_relations() {
    let bound = default_a_degree_bound(3);
    let word = |w: Vec<Generator>| AbOperator::normalize(&w, P, bound).unwrap();
    let ab = word(vec![Generator::A, Generator::B]);
    let ba = word(vec![Generator::B, Generator::A]);
    let bb = word(vec![Generator::B, Generator::B]);
    assert!(ab.sub(&ba).sub(&bb).is_zero());
    for m in 0..=5 {
        let mut lhs = vec![Generator::A; m];
        lhs.push(Generator::B);
        let a_plus_b = AbOperator::a(P, bound).add(&AbOperator::b(P, bound));
        let mut rhs = AbOperator::b(P, bound);
        for _ in 0..m {
            rhs = rhs.mul(&a_plus_b).unwrap();
        }
        assert_eq!(word(lhs), rhs, "a^{m} b");
    }
}
