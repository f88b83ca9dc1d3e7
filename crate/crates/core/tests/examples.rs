//! Every example must run to completion.

mod corpus_io {
    include!("../examples/corpus_io.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod label_reports {
    include!("../examples/label_reports.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod custom_rules {
    include!("../examples/custom_rules.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod score_reports {
    include!("../examples/score_reports.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod stratify_scores {
    include!("../examples/stratify_scores.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod label_then_eval {
    include!("../examples/label_then_eval.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod infuse_prior {
    include!("../examples/infuse_prior.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod grad_check {
    include!("../examples/grad_check.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod count_comparison {
    include!("../examples/count_comparison.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}

mod cli_run {
    include!("../examples/cli_run.rs");

    #[test]
    fn runs() {
        main().unwrap();
    }
}
