//! Prime-order group abstraction and the Ristretto255 reference instantiation.

use std::{
    fmt,
    iter::Sum,
    ops::{Add, Mul, Neg, Sub},
};

use curve25519_dalek::{
    constants::{RISTRETTO_BASEPOINT_POINT, RISTRETTO_BASEPOINT_TABLE},
    ristretto::{CompressedRistretto, RistrettoPoint},
    scalar::Scalar,
    traits::Identity,
};
use rand::{CryptoRng, RngCore};

use super::Digest;

/// Byte length of encoded elements and scalars.
pub const ENCODED_LEN: usize = 32;

/// Prime-order cyclic group with canonical 32-byte encodings of elements and scalars.
///
/// All sigma protocols in [`crate::crypto`] are written against this trait; the rest of
/// the crate uses the [`Ristretto`] instantiation through the default type parameters.
pub trait Group: Copy + fmt::Debug + Default + Send + Sync + 'static {
    type Scalar: Copy
        + Eq
        + fmt::Debug
        + Send
        + Sync
        + Add<Output = Self::Scalar>
        + Sub<Output = Self::Scalar>
        + Mul<Output = Self::Scalar>
        + Neg<Output = Self::Scalar>
        + Sum;
    type Element: Copy + Eq + fmt::Debug + Send + Sync;

    /// Stable identifier recorded in [`GroupParams`].
    const ID: &'static str;

    fn generator() -> Self::Element;

    /// Group order as little-endian bytes.
    fn order_bytes() -> [u8; ENCODED_LEN];

    fn scalar_zero() -> Self::Scalar;

    fn scalar_one() -> Self::Scalar;

    /// Uniform scalar, possibly zero.
    fn random_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Self::Scalar;

    /// Reduces a hash output modulo the group order.
    fn scalar_from_digest(digest: &Digest) -> Self::Scalar;

    fn mul_generator(k: &Self::Scalar) -> Self::Element;

    /// Computes `a * point + b * generator`. Not constant-time; only for public inputs.
    fn vartime_double_mul(
        a: &Self::Scalar,
        point: &Self::Element,
        b: &Self::Scalar,
    ) -> Self::Element;

    fn is_identity(element: &Self::Element) -> bool;

    fn element_to_bytes(element: &Self::Element) -> [u8; ENCODED_LEN];

    fn element_from_bytes(bytes: &[u8; ENCODED_LEN]) -> Option<Self::Element>;

    fn scalar_to_bytes(scalar: &Self::Scalar) -> [u8; ENCODED_LEN];

    /// Accepts only canonical (fully reduced) encodings.
    fn scalar_from_bytes(bytes: &[u8; ENCODED_LEN]) -> Option<Self::Scalar>;
}

/// Little-endian `2^252 + 27742317777372353535851937790883648493`.
const RISTRETTO_ORDER: [u8; ENCODED_LEN] = [
    0xed, 0xd3, 0xf5, 0x5c, 0x1a, 0x63, 0x12, 0x58, 0xd6, 0x9c, 0xf7, 0xa2, 0xde, 0xf9, 0xde, 0x14,
    0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0x10,
];

/// Ristretto255: prime order 2^252 + 27742317777372353535851937790883648493.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Ristretto;

impl Group for Ristretto {
    type Scalar = Scalar;
    type Element = RistrettoPoint;

    const ID: &'static str = "ristretto255";

    fn generator() -> RistrettoPoint {
        RISTRETTO_BASEPOINT_POINT
    }

    fn order_bytes() -> [u8; ENCODED_LEN] {
        RISTRETTO_ORDER
    }

    fn scalar_zero() -> Scalar {
        Scalar::ZERO
    }

    fn scalar_one() -> Scalar {
        Scalar::ONE
    }

    fn random_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
        let mut wide = [0u8; 64];
        rng.fill_bytes(&mut wide);
        Scalar::from_bytes_mod_order_wide(&wide)
    }

    fn scalar_from_digest(digest: &Digest) -> Scalar {
        Scalar::from_bytes_mod_order(*digest.as_bytes())
    }

    fn mul_generator(k: &Scalar) -> RistrettoPoint {
        RISTRETTO_BASEPOINT_TABLE * k
    }

    fn vartime_double_mul(a: &Scalar, point: &RistrettoPoint, b: &Scalar) -> RistrettoPoint {
        RistrettoPoint::vartime_double_scalar_mul_basepoint(a, point, b)
    }

    fn is_identity(element: &RistrettoPoint) -> bool {
        *element == RistrettoPoint::identity()
    }

    fn element_to_bytes(element: &RistrettoPoint) -> [u8; ENCODED_LEN] {
        element.compress().to_bytes()
    }

    fn element_from_bytes(bytes: &[u8; ENCODED_LEN]) -> Option<RistrettoPoint> {
        CompressedRistretto(*bytes).decompress()
    }

    fn scalar_to_bytes(scalar: &Scalar) -> [u8; ENCODED_LEN] {
        scalar.to_bytes()
    }

    fn scalar_from_bytes(bytes: &[u8; ENCODED_LEN]) -> Option<Scalar> {
        Option::from(Scalar::from_canonical_bytes(*bytes))
    }
}

/// Public description of the group in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupParams<G: Group = Ristretto> {
    pub group_id: &'static str,
    pub generator: G::Element,
    /// Little-endian group order.
    pub order: [u8; ENCODED_LEN],
}

impl<G: Group> GroupParams<G> {
    pub fn new() -> Self {
        Self {
            group_id: G::ID,
            generator: G::generator(),
            order: G::order_bytes(),
        }
    }
}

impl<G: Group> Default for GroupParams<G> {
    fn default() -> Self {
        Self::new()
    }
}
