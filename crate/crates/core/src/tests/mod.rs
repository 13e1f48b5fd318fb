//! Oracle and property tests. They live in the library's test binary so that
//! they run before the acceptance target, whose exit status reflects the
//! criteria verdicts.

pub(crate) mod common;
mod properties;
