use std::fmt;

/// Register identifier. Every key is an independent SWMR register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Key(pub u32);

/// Writer-local sequence number attached to every written value.
///
/// `Version(0)` is reserved for the initial value every key holds before the
/// first write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Version(pub u64);

impl Version {
    pub const INITIAL: Version = Version(0);

    pub fn next(self) -> Version {
        Version(self.0 + 1)
    }

    pub fn is_initial(self) -> bool {
        self.0 == 0
    }
}

/// Opaque payload. The protocol never inspects it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Value(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReplicaId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClientId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Client(ClientId),
    Replica(ReplicaId),
}

/// A `(key, value, version)` triple as stored at replicas. `value` is `None`
/// only for the initial value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VersionedValue {
    pub key: Key,
    pub value: Option<Value>,
    pub version: Version,
}

impl VersionedValue {
    pub fn initial(key: Key) -> Self {
        VersionedValue {
            key,
            value: None,
            version: Version::INITIAL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpKind {
    Read,
    Write,
}

impl OpKind {
    pub fn as_char(self) -> char {
        match self {
            OpKind::Read => 'R',
            OpKind::Write => 'W',
        }
    }
}

/// Which register emulation a client runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// One round-trip reads, 2-atomic.
    TwoAm,
    /// Two round-trip reads with write-back, atomic.
    Abd,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::TwoAm => "2am",
            Protocol::Abd => "abd",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "2am" | "twoam" => Ok(Protocol::TwoAm),
            "abd" => Ok(Protocol::Abd),
            other => Err(format!("unknown protocol `{other}` (expected 2am or abd)")),
        }
    }
}

/// Majority quorum size `⌊n/2⌋ + 1`.
pub fn majority(replicas: usize) -> usize {
    replicas / 2 + 1
}

/// Largest number of replicas that may crash while a majority stays live.
pub fn max_crashes(replicas: usize) -> usize {
    replicas.saturating_sub(1) / 2
}
