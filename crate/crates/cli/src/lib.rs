//! Commands behind the `msr` binary. Each returns a serializable summary so
//! the binary only handles argument parsing, printing and exit codes.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::os::unix::fs::FileExt;
use std::path::{Path, PathBuf};

use msrcode::format::{bytes_to_symbols, symbols_to_bytes, SHARD_HEADER_LEN};
use msrcode::mds::{self, MdsReport};
use msrcode::{
    BandwidthReport, Codec, CodeParams, CodeSpecFile, CodewordSource, FieldElement, ParityCheck,
    RepairPlan, ShardHeader,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Verification(String),
    #[error(transparent)]
    Code(#[from] msrcode::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use msrcode::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) | CliError::Io { .. } => EXIT_DATA,
            CliError::Verification(_) => EXIT_VERIFY,
            CliError::Code(e) => match e {
                E::Params(_) | E::BudgetExceeded { .. } | E::Repair(_) => EXIT_USAGE,
                E::RhoNotFound { .. } | E::Invariant(_) => EXIT_VERIFY,
                _ => EXIT_DATA,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn shard_path(dir: &Path, node: usize) -> PathBuf {
    dir.join(format!("shard_{node:03}.msr"))
}

pub fn load_spec(path: &Path) -> Result<(CodeSpecFile, ParityCheck)> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let spec = CodeSpecFile::from_json(&text)?;
    let pc = spec.to_parity_check()?;
    Ok((spec, pc))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenSummary {
    pub params: CodeParams,
    pub field_width: u8,
    pub rho: u16,
    pub rho_attempts: usize,
    pub widths_tried: Vec<u8>,
    pub escalated: bool,
    pub degree_bound: u128,
    pub report: MdsReport,
}

/// Finds a certified `rho` and returns the spec to write.
pub fn gen(
    n: usize,
    k: usize,
    d: usize,
    field_width: u8,
    seed: Option<u64>,
    max_subsets: u128,
) -> Result<(CodeSpecFile, GenSummary)> {
    if !matches!(field_width, 8 | 16) {
        return Err(CliError::Usage(format!("--field must be 8 or 16, got {field_width}")));
    }
    let p = CodeParams::derive(n, k, d)?;
    let start = seed.map_or(1, |s| (s % 0xFFFF) as u32 + 1);
    let generated = mds::generate(&p, field_width, start, max_subsets)?;
    let search = &generated.search;
    let spec = CodeSpecFile::from_parity_check(&search.parity_check);
    let summary = GenSummary {
        params: p,
        field_width: spec.field_width,
        rho: spec.rho,
        rho_attempts: search.attempts,
        widths_tried: generated.widths_tried.clone(),
        escalated: generated.escalated(),
        degree_bound: search.degree_bound,
        report: search.report.clone(),
    };
    Ok((spec, summary))
}

pub fn verify(pc: &ParityCheck, max_subsets: u128) -> Result<MdsReport> {
    Ok(mds::check_mds_with_budget(pc, max_subsets)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EncodeSummary {
    pub input_bytes: u64,
    pub stripes: u32,
    pub shards: Vec<PathBuf>,
    pub shard_payload_bytes: u64,
}

/// Bytes of input carried by one stripe.
pub fn stripe_bytes(pc: &ParityCheck) -> usize {
    let p = pc.params();
    p.k * p.alpha * pc.field().spec().symbol_bytes()
}

pub fn encode_file(pc: &ParityCheck, input: &Path, out_dir: &Path) -> Result<EncodeSummary> {
    let data = fs::read(input).map_err(io_err(input))?;
    encode_bytes(pc, &data, out_dir)
}

pub fn encode_bytes(pc: &ParityCheck, data: &[u8], out_dir: &Path) -> Result<EncodeSummary> {
    let p = *pc.params();
    let width = pc.field().spec().width_bits();
    let codec = Codec::new(pc.clone())?;
    let per_stripe = stripe_bytes(pc);
    let stripes = data.len().div_ceil(per_stripe);
    let stripe_count = u32::try_from(stripes)
        .map_err(|_| CliError::Usage(format!("input needs {stripes} stripes, more than a shard can hold")))?;

    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let header = ShardHeader {
        node: 0,
        n: p.n as u16,
        k: p.k as u16,
        d: p.d as u16,
        field_width: width,
        stripe_count,
        file_len: data.len() as u64,
    };
    let paths: Vec<PathBuf> = (1..=p.n).map(|j| shard_path(out_dir, j)).collect();
    let mut writers = paths
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
            ShardHeader {
                node: (i + 1) as u16,
                ..header
            }
            .write_to(&mut w)?;
            Ok(w)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut padded = vec![0u8; per_stripe];
    let mut buf = Vec::with_capacity(p.alpha * 2);
    for chunk in data.chunks(per_stripe) {
        padded[..chunk.len()].copy_from_slice(chunk);
        padded[chunk.len()..].fill(0);
        let codeword = codec.encode(&bytes_to_symbols(&padded, width))?;
        for (j, w) in writers.iter_mut().enumerate() {
            buf.clear();
            symbols_to_bytes(codeword.block(j + 1), width, &mut buf);
            w.write_all(&buf).map_err(io_err(&paths[j]))?;
        }
    }
    for (w, path) in writers.iter_mut().zip(&paths) {
        w.flush().map_err(io_err(path))?;
    }
    Ok(EncodeSummary {
        input_bytes: data.len() as u64,
        stripes: stripe_count,
        shard_payload_bytes: stripes as u64 * (p.alpha * pc.field().spec().symbol_bytes()) as u64,
        shards: paths,
    })
}

struct Shard {
    header: ShardHeader,
    payload: Vec<u8>,
}

fn read_shard(path: &Path, pc: &ParityCheck) -> Result<Shard> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let header = ShardHeader::from_bytes(&bytes)?;
    let payload_len = header.validate(pc.params(), pc.field().spec().width_bits())?;
    if (bytes.len() - SHARD_HEADER_LEN) as u64 != payload_len {
        return Err(CliError::Data(format!(
            "{}: payload is {} bytes, header implies {payload_len}",
            path.display(),
            bytes.len() - SHARD_HEADER_LEN
        )));
    }
    Ok(Shard {
        header,
        payload: bytes[SHARD_HEADER_LEN..].to_vec(),
    })
}

fn check_same_stripes(a: &ShardHeader, b: &ShardHeader) -> Result<()> {
    if (a.stripe_count, a.file_len) != (b.stripe_count, b.file_len) {
        return Err(CliError::Data(format!(
            "shards {} and {} disagree on stripe count or file length",
            a.node, b.node
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecodeSummary {
    pub shards_used: Vec<usize>,
    pub stripes: u32,
    pub output_bytes: u64,
}

/// Decodes from every shard present in `shard_dir`.
pub fn decode_dir(pc: &ParityCheck, shard_dir: &Path, out: &Path) -> Result<DecodeSummary> {
    let p = *pc.params();
    let mut shards: BTreeMap<usize, Shard> = BTreeMap::new();
    for j in 1..=p.n {
        let path = shard_path(shard_dir, j);
        if !path.exists() {
            continue;
        }
        let shard = read_shard(&path, pc)?;
        if shard.header.node as usize != j {
            return Err(CliError::Data(format!(
                "{} claims to be node {}",
                path.display(),
                shard.header.node
            )));
        }
        if let Some(first) = shards.values().next() {
            check_same_stripes(&first.header, &shard.header)?;
        }
        shards.insert(j, shard);
    }
    if shards.len() < p.k {
        return Err(msrcode::Error::InsufficientData {
            needed: p.k,
            available: shards.len(),
        }
        .into());
    }
    let header = shards.values().next().expect("at least k shards").header;
    let width = pc.field().spec().width_bits();
    let block_bytes = p.alpha * pc.field().spec().symbol_bytes();

    let codec = Codec::new(pc.clone())?;
    let nodes: Vec<usize> = shards.keys().copied().collect();
    let decoder = codec.erasure_decoder(&nodes)?;
    let mut data = Vec::with_capacity(header.stripe_count as usize * stripe_bytes(pc));
    for stripe in 0..header.stripe_count as usize {
        let range = stripe * block_bytes..(stripe + 1) * block_bytes;
        let blocks: Vec<Vec<FieldElement>> = shards
            .values()
            .map(|s| bytes_to_symbols(&s.payload[range.clone()], width))
            .collect();
        let refs: Vec<&[FieldElement]> = blocks.iter().map(Vec::as_slice).collect();
        let codeword = decoder.decode(&codec, &refs).map_err(|e| match e {
            msrcode::Error::Corruption => CliError::Data(format!("stripe {stripe} is inconsistent across shards")),
            e => e.into(),
        })?;
        symbols_to_bytes(&codeword.message(p.k), width, &mut data);
    }
    data.truncate(header.file_len as usize);
    fs::write(out, &data).map_err(io_err(out))?;
    Ok(DecodeSummary {
        shards_used: nodes,
        stripes: header.stripe_count,
        output_bytes: data.len() as u64,
    })
}

/// Runs of consecutive tuple indices, as `(start, len)`.
fn tuple_runs(tuples: &[usize]) -> Vec<(usize, usize)> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for &x in tuples {
        match runs.last_mut() {
            Some((start, len)) if *start + *len == x => *len += 1,
            _ => runs.push((x, 1)),
        }
    }
    runs
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepairSummary {
    #[serde(flatten)]
    pub report: BandwidthReport,
    pub stripes: u32,
    /// Payload bytes actually read from helper shard files.
    pub bytes_read_from_disk: u64,
    pub output: PathBuf,
}

/// Regenerates shard `failed` reading only the repair symbols of each helper.
pub fn repair_shard(
    pc: &ParityCheck,
    failed: usize,
    helpers: &[usize],
    shard_dir: &Path,
    out: Option<&Path>,
) -> Result<RepairSummary> {
    let p = *pc.params();
    let plan = RepairPlan::new(pc, failed, helpers)?;
    let width = pc.field().spec().width_bits();
    let sym = pc.field().spec().symbol_bytes();
    let block_bytes = p.alpha * sym;

    let mut files = Vec::with_capacity(p.d);
    let mut header: Option<ShardHeader> = None;
    for &h in plan.helpers() {
        let path = shard_path(shard_dir, h);
        let file = File::open(&path).map_err(io_err(&path))?;
        let mut head = [0u8; SHARD_HEADER_LEN];
        file.read_exact_at(&mut head, 0)
            .map_err(|_| CliError::Data(format!("{}: shard header truncated", path.display())))?;
        let hh = ShardHeader::from_bytes(&head)?;
        let payload = hh.validate(&p, width)?;
        if hh.node as usize != h {
            return Err(CliError::Data(format!("{} claims to be node {}", path.display(), hh.node)));
        }
        let len = file.metadata().map_err(io_err(&path))?.len();
        if len != SHARD_HEADER_LEN as u64 + payload {
            return Err(CliError::Data(format!("{}: payload length mismatch", path.display())));
        }
        if let Some(first) = &header {
            check_same_stripes(first, &hh)?;
        }
        header = Some(hh);
        files.push((h, path, file));
    }
    let header = header.expect("d >= 1 helpers");

    let runs = tuple_runs(plan.repair_tuples());
    let out_path = out.map_or_else(|| shard_path(shard_dir, failed), Path::to_path_buf);
    let mut writer = BufWriter::new(File::create(&out_path).map_err(io_err(&out_path))?);
    ShardHeader {
        node: failed as u16,
        ..header
    }
    .write_to(&mut writer)?;

    let mut bytes_read = 0u64;
    let mut raw = vec![0u8; block_bytes];
    let mut fetched = Vec::with_capacity(plan.fetches().len());
    let mut buf = Vec::with_capacity(block_bytes);
    for stripe in 0..header.stripe_count as u64 {
        fetched.clear();
        for (_, path, file) in &files {
            for &(start, len) in &runs {
                let offset = SHARD_HEADER_LEN as u64 + stripe * block_bytes as u64 + (start * sym) as u64;
                let dst = &mut raw[..len * sym];
                file.read_exact_at(dst, offset).map_err(io_err(path))?;
                bytes_read += dst.len() as u64;
                fetched.extend(bytes_to_symbols(dst, width));
            }
        }
        let mut session = plan.start();
        session.stage1(&fetched)?;
        session.stage2()?;
        let block = session.finish()?;
        buf.clear();
        symbols_to_bytes(&block, width, &mut buf);
        writer.write_all(&buf).map_err(io_err(&out_path))?;
    }
    writer.flush().map_err(io_err(&out_path))?;

    let report = plan.bandwidth(header.stripe_count as u64);
    if report.bytes_downloaded != bytes_read {
        return Err(msrcode::Error::Invariant(format!(
            "read {bytes_read} bytes, plan accounts for {}",
            report.bytes_downloaded
        ))
        .into());
    }
    Ok(RepairSummary {
        report,
        stripes: header.stripe_count,
        bytes_read_from_disk: bytes_read,
        output: out_path,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub seed: u64,
    pub trials: u64,
    pub exact_repairs: u64,
    pub expected_symbols_per_repair: u64,
    pub min_symbols_downloaded: u64,
    pub max_symbols_downloaded: u64,
    pub mean_symbols_downloaded: f64,
    pub naive_symbols_per_repair: u64,
    pub savings_ratio: f64,
    /// Failures per node index, `failed_counts[j - 1]`.
    pub failed_counts: Vec<u64>,
}

/// Random single-node failures with random helper sets over fresh random
/// codewords; every repair is compared against the original block.
pub fn simulate(pc: &ParityCheck, trials: u64, seed: u64) -> Result<SimulationSummary> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let p = *pc.params();
    let codec = Codec::new(pc.clone())?;
    let order = pc.field().order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exact = 0u64;
    let mut total = 0u64;
    let (mut min, mut max) = (u64::MAX, 0u64);
    let mut failed_counts = vec![0u64; p.n];
    for _ in 0..trials {
        let message: Vec<FieldElement> = (0..codec.message_len())
            .map(|_| FieldElement(rng.gen_range(0..order) as u16))
            .collect();
        let codeword = codec.encode(&message)?;
        let failed = rng.gen_range(1..=p.n);
        let mut survivors: Vec<usize> = (1..=p.n).filter(|&j| j != failed).collect();
        survivors.shuffle(&mut rng);
        let helpers = &survivors[..p.d];

        let mut source = CodewordSource::new(&codeword);
        let plan = RepairPlan::new(pc, failed, helpers)?;
        let block = plan.repair(&mut source)?;
        if block == codeword.block(failed) && source.reads.iter().all(|(j, _)| helpers.contains(j)) {
            exact += 1;
        }
        let downloaded = source.reads.len() as u64;
        total += downloaded;
        min = min.min(downloaded);
        max = max.max(downloaded);
        failed_counts[failed - 1] += 1;
    }
    Ok(SimulationSummary {
        n: p.n,
        k: p.k,
        d: p.d,
        seed,
        trials,
        exact_repairs: exact,
        expected_symbols_per_repair: p.repair_bandwidth() as u64,
        min_symbols_downloaded: min,
        max_symbols_downloaded: max,
        mean_symbols_downloaded: total as f64 / trials as f64,
        naive_symbols_per_repair: p.naive_bandwidth() as u64,
        savings_ratio: p.naive_bandwidth() as f64 / p.repair_bandwidth() as f64,
        failed_counts,
    })
}
