//! Acceptance suite for `riemann-ifs`; the checks live in `tests/acceptance.rs`.
