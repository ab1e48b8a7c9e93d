//! Raw image handling and the preprocessing chain: RGB conversion, median
//! denoising, bilinear resize and Min-Max normalization.

mod color;
mod filter;
mod image;
mod normalize;
mod pipeline;
mod resize;

pub use self::color::to_rgb;
pub use self::filter::median_filter;
pub use self::image::{decode_image, load_image, read_ppm, write_ppm, RawImage};
pub use self::normalize::min_max_normalize;
pub use self::pipeline::{
    preprocess_pipeline, write_tensor_csv, PreprocessConfig, ProcessedTensor,
};
pub use self::resize::resize_bilinear;
