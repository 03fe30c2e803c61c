use abmod::scalar::rat;
use abmod::session::{parse_session, Binding, Command, PolyLit, Session, Stmt};
use abmod::Rational;
use num_traits::Zero;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=7).prop_map(|(p, q)| rat(p, q))
}

fn poly() -> impl Strategy<Value = PolyLit> {
    prop::collection::vec(rational(), 0..4).prop_map(|mut c| {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        c
    })
}

fn square(k: usize) -> impl Strategy<Value = Vec<Vec<PolyLit>>> {
    prop::collection::vec(prop::collection::vec(poly(), k), k)
}

fn binding() -> impl Strategy<Value = Binding> {
    prop_oneof![
        prop::collection::vec((rational(), prop::option::of(poly())), 1..4)
            .prop_map(Binding::Fresco),
        (
            prop::collection::vec(rational(), 1..3),
            any::<bool>(),
            0usize..4,
            prop::option::of(1usize..3)
        )
            .prop_map(|(alphas, bracketed, n, dim)| Binding::Xi {
                bracketed: bracketed || alphas.len() > 1,
                alphas,
                n,
                dim,
            }),
        (1usize..3).prop_flat_map(square).prop_map(Binding::Module),
        (1usize..3).prop_flat_map(square).prop_map(Binding::System),
    ]
}

fn command() -> impl Strategy<Value = Command> {
    prop_oneof![
        Just(Command::Bernstein),
        Just(Command::Saturate),
        Just(Command::Geometric),
        Just(Command::Filtration),
        Just(Command::HigherBernstein),
        Just(Command::Embed),
        Just(Command::Report),
        Just(Command::Formula),
        prop::collection::vec(rational(), 0..3).prop_map(Command::Primitive),
        rational().prop_map(Command::Eigen),
        prop::option::of(0usize..9).prop_map(Command::Expansion),
        prop::collection::vec(poly(), 1..3).prop_map(Command::Jh),
        prop::collection::vec(poly(), 1..3).prop_map(Command::Generated),
    ]
}

fn session() -> impl Strategy<Value = Session> {
    (
        prop::collection::vec((binding(), prop::option::of(1usize..64)), 1..4),
        prop::collection::vec((command(), 0usize..4), 0..6),
        prop::option::of(1usize..100),
    )
        .prop_map(|(lets, shows, global)| {
            let mut stmts = Vec::new();
            if let Some(p) = global {
                stmts.push(Stmt::Precision(p));
            }
            let n = lets.len();
            for (i, (binding, precision)) in lets.into_iter().enumerate() {
                stmts.push(Stmt::Let {
                    name: format!("N{i}"),
                    binding,
                    precision,
                });
            }
            for (command, i) in shows {
                stmts.push(Stmt::Show {
                    command,
                    name: format!("N{}", i % n),
                });
            }
            let lines = (1..=stmts.len()).collect();
            Session { stmts, lines }
        })
}

proptest! {
    #[test]
    fn render_then_parse(s in session()) {
        let text = s.to_string();
        let back = parse_session(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn whitespace_and_comments_are_ignored(s in session()) {
        let noisy: String = s
            .to_string()
            .lines()
            .map(|l| format!("  {}   # note\n\n", l.replace(", ", " ,  ")))
            .collect();
        prop_assert_eq!(parse_session(&noisy).unwrap(), s);
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,80}") {
        let _ = parse_session(&text);
    }
}
