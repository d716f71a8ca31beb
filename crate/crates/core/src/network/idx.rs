//! IDX image and label files (unsigned-byte payloads only).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// A decoded image set: `count` images of `rows × cols` bytes each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    pub images: Vec<Vec<u8>>,
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Parse(format!("IDX header truncated at byte {at}")))
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let magic = be_u32(bytes, 0)?;
    if magic != expected {
        return Err(Error::Parse(format!(
            "IDX magic {magic:#010x}, expected {expected:#010x}"
        )));
    }
    Ok(())
}

pub fn parse_images(bytes: &[u8]) -> Result<IdxImages> {
    check_magic(bytes, IMAGES_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let size = rows * cols;
    let body = &bytes[16..];
    if body.len() != count * size {
        return Err(Error::Parse(format!(
            "IDX image payload is {} bytes, header implies {}",
            body.len(),
            count * size
        )));
    }
    let images = if size == 0 {
        vec![Vec::new(); count]
    } else {
        body.chunks_exact(size).map(<[u8]>::to_vec).collect()
    };
    Ok(IdxImages { rows, cols, images })
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABELS_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let body = &bytes[8..];
    if body.len() != count {
        return Err(Error::Parse(format!(
            "IDX label payload is {} bytes, header declares {count}",
            body.len()
        )));
    }
    Ok(body.to_vec())
}

pub fn read_images(path: &Path) -> Result<IdxImages> {
    parse_images(&fs::read(path)?)
}

pub fn read_labels(path: &Path) -> Result<Vec<u8>> {
    parse_labels(&fs::read(path)?)
}

pub fn encode_images(images: &IdxImages) -> Result<Vec<u8>> {
    let size = images.rows * images.cols;
    let mut out = Vec::with_capacity(16 + images.images.len() * size);
    for v in [IMAGES_MAGIC, images.images.len() as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for (k, img) in images.images.iter().enumerate() {
        if img.len() != size {
            return Err(Error::Dimension(format!(
                "image {k} has {} bytes, expected {size}",
                img.len()
            )));
        }
        out.extend_from_slice(img);
    }
    Ok(out)
}

pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

pub fn write_images(path: &Path, images: &IdxImages) -> Result<()> {
    fs::write(path, encode_images(images)?)?;
    Ok(())
}

pub fn write_labels(path: &Path, labels: &[u8]) -> Result<()> {
    fs::write(path, encode_labels(labels))?;
    Ok(())
}
