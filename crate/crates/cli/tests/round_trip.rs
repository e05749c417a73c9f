use std::fs;
use std::path::Path;

use proptest::prelude::*;
use qsector_cli::ast::*;
use qsector_cli::demos::CORPUS;
use qsector_cli::parser::KEYWORDS;
use qsector_cli::{parse_syntax, print_scenario};

fn corpus_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

#[test]
fn corpus_round_trips() {
    let mut seen = 0;
    for entry in fs::read_dir(corpus_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "qs") {
            continue;
        }
        let src = fs::read_to_string(&path).unwrap();
        let first = parse_syntax(&src).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let printed = print_scenario(&first);
        let second = parse_syntax(&printed).unwrap_or_else(|e| panic!("{}: {e}\n{printed}", path.display()));
        assert_eq!(first, second, "{}", path.display());
        assert_eq!(print_scenario(&second), printed);
        seen += 1;
    }
    assert!(seen >= 8);
}

#[test]
fn bundled_corpus_matches_directory() {
    let mut on_disk: Vec<String> = fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".qs"))
        .collect();
    on_disk.sort();
    let mut bundled: Vec<String> = CORPUS.iter().map(|(n, _)| n.to_string()).collect();
    bundled.sort();
    assert_eq!(on_disk, bundled);
    for (name, src) in CORPUS {
        assert_eq!(fs::read_to_string(corpus_dir().join(name)).unwrap(), *src);
    }
}

fn span() -> Span {
    Span::default()
}

fn name() -> impl Strategy<Value = String> {
    "[a-z_][a-z0-9_]{0,5}".prop_filter("keyword", |s| !KEYWORDS.contains(&s.as_str()))
}

fn ident() -> impl Strategy<Value = Ident> {
    name().prop_map(|name| Ident { name, span: span() })
}

fn number() -> impl Strategy<Value = Expr> {
    (prop_oneof![0.0..1e6f64, (0u32..1000).prop_map(f64::from), 1e-30..1e-3f64], any::<bool>())
        .prop_map(|(value, imaginary)| Expr::Number { value, imaginary, span: span() })
}

fn outcome_set() -> impl Strategy<Value = OutcomeSet> {
    let leaf = prop_oneof![
        prop::collection::vec(number(), 0..3).prop_map(|values| OutcomeSet::Values { values, span: span() }),
        Just(OutcomeSet::All { span: span() }),
    ];
    leaf.prop_recursive(2, 4, 1, |inner| {
        inner.prop_map(|s| OutcomeSet::Complement { inner: Box::new(s), span: span() })
    })
}

fn arg(e: BoxedStrategy<Expr>) -> impl Strategy<Value = Arg> {
    prop_oneof![
        e.clone().prop_map(Arg::plain),
        (e.clone(), e.clone()).prop_map(|(w, value)| Arg { name: None, weight: Some(w), value }),
        (ident(), e).prop_map(|(n, value)| Arg { name: Some(n), weight: None, value }),
    ]
}

fn expr() -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        number(),
        any::<bool>().prop_map(|value| Expr::Bool { value, span: span() }),
        ident().prop_map(Expr::Name),
        outcome_set().prop_map(Expr::Outcomes),
    ];
    leaf.prop_recursive(3, 24, 3, |e| {
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)];
        prop_oneof![
            (op, e.clone(), e.clone()).prop_map(|(op, l, r)| Expr::Binary {
                op,
                lhs: Box::new(l),
                rhs: Box::new(r),
                span: span()
            }),
            e.clone().prop_map(|x| Expr::Neg { expr: Box::new(x), span: span() }),
            (ident(), prop::collection::vec(arg(e.clone()), 0..3)).prop_map(|(func, args)| Expr::Call {
                func,
                args,
                span: span()
            }),
            (
                1usize..3,
                1usize..3,
                prop::collection::vec(
                    e.clone().prop_filter("matrix entries are not brackets", |x| !matches!(
                        x,
                        Expr::List { .. } | Expr::Matrix { .. }
                    )),
                    9
                )
            )
                .prop_map(|(r, c, pool)| Expr::Matrix {
                    rows: (0..r).map(|i| pool[i * c..(i + 1) * c].to_vec()).collect(),
                    span: span()
                }),
            prop::collection::vec(e.clone(), 0..3)
                .prop_filter("list of lists is a matrix", |items| {
                    items.is_empty() || !items.iter().all(|x| matches!(x, Expr::List { .. } | Expr::Matrix { .. }))
                })
                .prop_map(|items| Expr::List { items, span: span() }),
        ]
    })
    .boxed()
}

fn item() -> impl Strategy<Value = Item> {
    let entry = (ident(), expr()).prop_map(|(key, value)| Entry { key, value });
    let block = (ident(), prop::collection::vec(entry, 0..3))
        .prop_map(|(name, entries)| Block { name, entries, span: span() })
        .boxed();
    prop_oneof![
        (ident(), expr()).prop_map(|(name, value)| Item::Let(Let { name, value })),
        block.clone().prop_map(Item::Algebra),
        block.prop_map(Item::Measurement),
        (ident(), prop::collection::vec(arg(expr()), 0..3)).prop_map(|(kind, args)| Item::Query(Query {
            kind,
            args,
            span: span()
        })),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_trees_parse_back(name in prop::option::of("[a-zA-Z0-9 _-]{0,12}"), items in prop::collection::vec(item(), 0..5)) {
        let tree = Scenario { name, items };
        let printed = print_scenario(&tree);
        let back = parse_syntax(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert_eq!(back, tree, "{}", printed);
    }
}
