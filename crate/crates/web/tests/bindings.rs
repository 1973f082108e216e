use tailcop_web::{density_impl, path_impl, sample_impl, summary_impl};

#[test]
fn every_family_round_trips() {
    let cases: [(&str, &[f64], &[f64]); 5] = [
        ("normal", &[0.4], &[0.2, 0.5, 0.6]),
        ("student-t", &[0.4, 6.0], &[0.2, 0.5, 0.6, -5.0, 0.2, 0.1]),
        ("gumbel", &[1.8], &[-2.0, 1.5, 0.7]),
        ("clayton", &[1.2], &[0.5, -1.0, 0.5]),
        ("sjc", &[0.3, 0.5], &[-1.0, 1.0, 0.5, -1.0, 1.0, 0.5]),
    ];
    for (family, params, coef) in cases {
        let s = summary_impl(family, params).unwrap();
        assert!(s[0] >= 0.0 && s[1] >= 0.0, "{family}");
        let uv = sample_impl(family, params, 200, 9).unwrap();
        assert_eq!(uv.len(), 400);
        let g = density_impl(family, params, 16).unwrap();
        assert!(g.iter().all(|x| x.is_finite()), "{family}");
        let p = path_impl(family, coef, 100, 2).unwrap();
        assert_eq!(p.len(), 300);
        assert!(
            p.chunks(3)
                .all(|c| (0.0..1.0).contains(&c[1]) && (0.0..1.0).contains(&c[2])),
            "{family}"
        );
    }
}

#[test]
fn bad_input_is_an_error_message() {
    assert!(sample_impl("normal", &[1.5], 10, 0).unwrap_err().contains("rho"));
    assert!(density_impl("gumbel", &[2.0], 0).is_err());
    assert!(path_impl("gumbel", &[1.0, 2.0], 10, 0).is_err());
}
