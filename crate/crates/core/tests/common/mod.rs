//! Helpers shared by the integration suites.

#![allow(dead_code)]

pub mod analysis;
pub mod fixture;
pub mod http;
