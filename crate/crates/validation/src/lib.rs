//! Holds the `acceptance` test target; run it with
//! `cargo test -p elastica-validation --test acceptance`.
