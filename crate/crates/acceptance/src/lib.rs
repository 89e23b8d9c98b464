//! Acceptance criteria for `geodec` live in `tests/acceptance.rs`.
