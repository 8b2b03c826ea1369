use crate::protocol::fec::FecError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(
        "insecure regime: min-entropy rate {rate:.6} minus H(Q) = {noise_entropy:.6} leaves a deficit of {deficit:.6}"
    )]
    InsecureRegime { rate: f64, noise_entropy: f64, deficit: f64 },
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("truth table is not canonical: f(0) = 1")]
    NotCanonical,
    #[error("state error: {0}")]
    State(String),
    #[error("channel definition error: {0}")]
    Channel(String),
    #[error("public key already spent: each copy encrypts a single message")]
    SpentPublicKey,
    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    Length { what: &'static str, expected: usize, got: usize },
    #[error("unsupported format `{0}`")]
    Format(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("decryption failed: {0}")]
    DecryptionFailure(#[source] FecError),
    #[error(transparent)]
    Fec(#[from] FecError),
    #[error("oracle budget exhausted: at most {0} public keys may be requested")]
    Budget(u64),
    #[error("unknown adversary strategy `{0}`")]
    UnknownStrategy(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
