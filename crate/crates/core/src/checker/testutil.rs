use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{OpRecord, Trace, TraceMeta};
use crate::proto::{ClientId, Key, OpId, OpKind, Version};
use crate::simnet::SimTime;

pub fn write(id: u64, version: u64, st: f64, ft: f64) -> OpRecord {
    OpRecord {
        op: OpId(id),
        client: ClientId(0),
        kind: OpKind::Write,
        key: Key(0),
        version: Version(version),
        invoke: SimTime::from_secs(st),
        response: SimTime::from_secs(ft),
    }
}

pub fn read(id: u64, client: u32, version: u64, st: f64, ft: f64) -> OpRecord {
    OpRecord {
        kind: OpKind::Read,
        client: ClientId(client),
        ..write(id, version, st, ft)
    }
}

pub fn trace(ops: Vec<OpRecord>) -> Trace {
    Trace::new(TraceMeta::default(), ops)
}

/// w' = version 1 on [0, 0.5], w = version 2 on [1, 2], r' on [1.1, 1.2]
/// and r on [1.3, 1.6].
pub fn inversion_trace(r_prime_version: u64, r_version: u64) -> Trace {
    trace(vec![
        write(1, 1, 0.0, 0.5),
        write(2, 2, 1.0, 2.0),
        read(10, 1, r_prime_version, 1.1, 1.2),
        read(11, 2, r_version, 1.3, 1.6),
    ])
}

/// Random single-writer trace on up to two keys. Each read returns a
/// version between the latest write completed at its invocation and the
/// latest write started by its response, so the trace is regular but may
/// contain inversions. With `jitter`, a read's version is occasionally
/// pushed one further into the past.
pub fn random_trace(seed: u64, ops: usize, readers: u32, jitter: bool) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys = rng.random_range(1..=2u32);
    let mut out = Vec::with_capacity(ops);
    let mut writes: Vec<Vec<(f64, f64)>> = vec![Vec::new(); keys as usize];
    let mut t = 0.0;
    let writes_wanted = ops / 4 + 1;
    for i in 0..writes_wanted {
        t += rng.random_range(0.05..1.0);
        let ft = t + rng.random_range(0.1..1.5);
        let k = rng.random_range(0..keys);
        writes[k as usize].push((t, ft));
        let mut w = write(i as u64, writes[k as usize].len() as u64, t, ft);
        w.key = Key(k);
        out.push(w);
        t = ft;
    }
    let horizon = t + 1.0;
    let mut next_id = writes_wanted as u64;
    for c in 1..=readers {
        let mut t = rng.random_range(0.0..0.5);
        while out.len() < ops && t < horizon {
            let st = t;
            let ft = st + rng.random_range(0.05..1.2);
            let k = rng.random_range(0..keys);
            let ws = &writes[k as usize];
            let lo = ws.iter().filter(|w| w.1 < st).count() as u64;
            let hi = ws.iter().filter(|w| w.0 < ft).count() as u64;
            let mut v = rng.random_range(lo..=hi);
            if jitter && v > 0 && rng.random_bool(0.15) {
                v -= 1;
            }
            let mut r = read(next_id, c, v, st, ft);
            r.key = Key(k);
            out.push(r);
            next_id += 1;
            t = ft + rng.random_range(0.01..0.6);
        }
    }
    trace(out)
}
