use std::fmt;

use rand::{rngs::OsRng, CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::group::{Group, GroupParams, Ristretto};
use crate::codec::{DecodeError, Reader, Writer};

/// A secret scalar in `[1, order)` and its public element `generator^secret`.
///
/// Deliberately not [`Encode`](crate::codec::Encode): secrets never enter block bytes.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct KeyPair<G: Group = Ristretto> {
    secret: G::Scalar,
    public: G::Element,
}

impl<G: Group> KeyPair<G> {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            if let Some(kp) = Self::from_secret(G::random_scalar(rng)) {
                return kp;
            }
        }
    }

    /// `None` for the zero scalar.
    pub fn from_secret(secret: G::Scalar) -> Option<Self> {
        (secret != G::scalar_zero()).then(|| Self {
            secret,
            public: G::mul_generator(&secret),
        })
    }

    pub fn secret(&self) -> &G::Scalar {
        &self.secret
    }

    pub fn public(&self) -> &G::Element {
        &self.public
    }
}

impl<G: Group> fmt::Debug for KeyPair<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("public", &self.public)
            .finish_non_exhaustive()
    }
}

/// Generates a key pair; a fixed `seed` yields the same pair on every call.
pub fn keygen<G: Group>(_params: &GroupParams<G>, seed: Option<[u8; 32]>) -> KeyPair<G> {
    match seed {
        Some(seed) => KeyPair::generate(&mut ChaCha20Rng::from_seed(seed)),
        None => KeyPair::generate(&mut OsRng),
    }
}

pub(crate) fn put_element<G: Group>(out: &mut Writer, element: &G::Element) {
    out.fixed(&G::element_to_bytes(element));
}

pub(crate) fn put_scalar<G: Group>(out: &mut Writer, scalar: &G::Scalar) {
    out.fixed(&G::scalar_to_bytes(scalar));
}

pub(crate) fn get_element<G: Group>(input: &mut Reader<'_>) -> Result<G::Element, DecodeError> {
    G::element_from_bytes(&input.array()?).ok_or(DecodeError::InvalidElement)
}

pub(crate) fn get_scalar<G: Group>(input: &mut Reader<'_>) -> Result<G::Scalar, DecodeError> {
    G::scalar_from_bytes(&input.array()?).ok_or(DecodeError::InvalidScalar)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn unit_secret_maps_to_generator() {
        let kp = KeyPair::<Ristretto>::from_secret(Ristretto::scalar_one()).unwrap();
        assert_eq!(*kp.public(), Ristretto::generator());
        assert!(KeyPair::<Ristretto>::from_secret(Ristretto::scalar_zero()).is_none());
    }

    #[test]
    fn seeded_keygen_is_reproducible() {
        let params = GroupParams::<Ristretto>::new();
        let a = keygen(&params, Some([9; 32]));
        let b = keygen(&params, Some([9; 32]));
        assert_eq!(a, b);
        assert_eq!(*a.public(), Ristretto::mul_generator(a.secret()));
    }

    #[test]
    fn distinct_seeds_give_distinct_publics() {
        let params = GroupParams::<Ristretto>::new();
        let mut seen = HashSet::new();
        for i in 0u32..10_000 {
            let mut seed = [0u8; 32];
            seed[..4].copy_from_slice(&i.to_be_bytes());
            let kp = keygen(&params, Some(seed));
            assert!(seen.insert(Ristretto::element_to_bytes(kp.public())));
        }
    }

    #[test]
    fn debug_output_hides_secret() {
        let kp = keygen(&GroupParams::<Ristretto>::new(), Some([1; 32]));
        let shown = format!("{kp:?}");
        assert!(!shown.contains("secret"));
    }
}
