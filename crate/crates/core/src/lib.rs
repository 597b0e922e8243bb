#![no_std]
extern crate alloc;

pub mod augment;
pub mod data;
pub mod error;
pub mod experiment;
pub mod net;
pub mod numkit;
pub mod regularize;
pub mod tasks;

pub use error::{Error, Result};
