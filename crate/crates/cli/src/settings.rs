//! Merges flags, the optional config file and the environment.

use std::path::PathBuf;

use mumford_core::io::ConfigFile;
use mumford_core::{Error, Result};

use crate::{Command, Flags};

pub const OUT_DIR_ENV: &str = "MUMFORD_OUT_DIR";

#[derive(Clone, Debug)]
pub struct Settings {
    pub genus: usize,
    pub trunc: i32,
    pub wordlen: usize,
    pub identify_inverses: bool,
    pub normalized: bool,
    pub group_file: Option<PathBuf>,
    pub primes: Vec<u64>,
    pub out: PathBuf,
    pub stdout: bool,
    pub threads: Option<usize>,
    pub precision: u32,
    pub nodes: usize,
}

impl Settings {
    pub fn resolve(command: Command, flags: &Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(p) => ConfigFile::load(p.as_ref())?,
            None => ConfigFile::default(),
        };
        let delta = command == Command::Genus1Delta;
        let genus = flags.genus.or(file.genus).unwrap_or(if delta { 1 } else { 2 });
        let default_trunc = match command {
            Command::Genus1Delta => 12,
            Command::CompareNumeric => 4,
            _ => 2,
        };
        let trunc = flags.trunc.or(file.trunc).unwrap_or(default_trunc);
        if trunc < 0 {
            return Err(Error::Config(format!("truncation {trunc} must be non-negative")));
        }
        if delta {
            if genus != 1 {
                return Err(Error::Config("genus1-delta works in genus 1".into()));
            }
            if trunc < 1 {
                return Err(Error::Config("genus1-delta needs --trunc >= 1".into()));
            }
        } else if genus < 2 {
            return Err(Error::Config(format!("genus {genus} is below 2")));
        }
        let wordlen = flags.wordlen.or(file.wordlen).unwrap_or(trunc as usize);
        let general_x = flags.general_x || file.general_x.unwrap_or(false);
        let normalized = !general_x && file.normalized.unwrap_or(true);
        let precision = flags.precision.or(file.precision).unwrap_or(53);
        if precision != 53 && precision != 106 {
            return Err(Error::Config(format!("precision {precision} must be 53 or 106")));
        }
        let primes = flags.primes.clone().or(file.primes).unwrap_or_else(|| vec![2, 3, 5]);
        if primes.iter().any(|&p| p < 2) {
            return Err(Error::Config("primes must be at least 2".into()));
        }
        let out = flags
            .out
            .clone()
            .or(file.out)
            .or_else(|| std::env::var(OUT_DIR_ENV).ok())
            .unwrap_or_else(|| ".".into());
        let threads = flags.threads.or(file.threads);
        if threads == Some(0) {
            return Err(Error::Config("--threads must be positive".into()));
        }
        Ok(Settings {
            genus,
            trunc,
            wordlen,
            identify_inverses: flags.identify_inverses || file.identify_inverses.unwrap_or(false),
            normalized,
            group_file: flags.group_file.clone().or(file.group_file).map(PathBuf::from),
            primes,
            out: PathBuf::from(out),
            stdout: flags.stdout || file.stdout.unwrap_or(false),
            threads,
            precision,
            nodes: flags.nodes.or(file.nodes).unwrap_or(2048),
        })
    }
}
