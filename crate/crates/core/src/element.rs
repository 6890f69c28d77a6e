use core::fmt::{self, Debug};

use half::f16;

/// Storage precision of matrix values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    F32,
    F16,
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::F32 => f.write_str("f32"),
            Precision::F16 => f.write_str("f16"),
        }
    }
}

/// A value type the kernels can load, accumulate (always in `f32`) and store.
pub trait Element: Copy + Send + Sync + PartialEq + Debug + Default + 'static {
    const PRECISION: Precision;
    const ZERO: Self;
    const ONE: Self;

    fn to_f32(self) -> f32;

    /// Rounds to nearest, ties to even.
    fn from_f32(v: f32) -> Self;

    fn from_f64(v: f64) -> Self;
}

impl Element for f32 {
    const PRECISION: Precision = Precision::F32;
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    #[inline(always)]
    fn to_f32(self) -> f32 {
        self
    }

    #[inline(always)]
    fn from_f32(v: f32) -> Self {
        v
    }

    #[inline(always)]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
}

impl Element for f16 {
    const PRECISION: Precision = Precision::F16;
    const ZERO: Self = f16::ZERO;
    const ONE: Self = f16::ONE;

    #[inline(always)]
    fn to_f32(self) -> f32 {
        f16::to_f32(self)
    }

    #[inline(always)]
    fn from_f32(v: f32) -> Self {
        f16::from_f32(v)
    }

    #[inline(always)]
    fn from_f64(v: f64) -> Self {
        f16::from_f64(v)
    }
}

/// Width of the column-index array of a CSR matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IndexWidth {
    U32,
    U16,
}

impl fmt::Display for IndexWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexWidth::U32 => f.write_str("32-bit"),
            IndexWidth::U16 => f.write_str("16-bit"),
        }
    }
}

/// Column index storage type.
pub trait SparseIndex: Copy + Send + Sync + Ord + Debug + Default + 'static {
    const WIDTH: IndexWidth;
    /// Largest number of columns (and nonzeros per row) this width admits.
    const MAX_EXTENT: usize;
    /// Whether kernels may store pre-multiplied dense offsets in this width.
    /// Narrow indices have no headroom for the product, so they are scaled at
    /// use instead.
    const PRESCALE: bool;

    fn to_usize(self) -> usize;

    fn from_usize(v: usize) -> Option<Self>;
}

impl SparseIndex for u32 {
    const WIDTH: IndexWidth = IndexWidth::U32;
    const MAX_EXTENT: usize = u32::MAX as usize;
    const PRESCALE: bool = true;

    #[inline(always)]
    fn to_usize(self) -> usize {
        self as usize
    }

    #[inline(always)]
    fn from_usize(v: usize) -> Option<Self> {
        u32::try_from(v).ok()
    }
}

impl SparseIndex for u16 {
    const WIDTH: IndexWidth = IndexWidth::U16;
    const MAX_EXTENT: usize = u16::MAX as usize;
    const PRESCALE: bool = false;

    #[inline(always)]
    fn to_usize(self) -> usize {
        self as usize
    }

    #[inline(always)]
    fn from_usize(v: usize) -> Option<Self> {
        u16::try_from(v).ok()
    }
}
