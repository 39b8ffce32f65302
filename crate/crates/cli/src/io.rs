//! WAV input and output. Processing is mono f64; multichannel files are
//! reduced to their first channel with a warning.

use std::path::Path;

use crate::errors::{CliError, Result};

#[derive(Debug)]
pub struct Audio {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    /// Whether the source was 32-bit float (preserved on write).
    pub float: bool,
}

pub fn read_wav(path: &Path) -> Result<Audio> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(CliError::Io(format!("{}: zero channels", path.display())));
    }
    if channels > 1 {
        eprintln!(
            "warning: {} has {channels} channels; using only the first",
            path.display()
        );
    }
    let (samples, float) = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => {
            let s: std::result::Result<Vec<f32>, _> = reader.samples::<f32>().collect();
            (s?.iter().step_by(channels).map(|&v| v as f64).collect(), true)
        }
        (hound::SampleFormat::Int, 16) => {
            let s: std::result::Result<Vec<i16>, _> = reader.samples::<i16>().collect();
            (
                s?.iter()
                    .step_by(channels)
                    .map(|&v| v as f64 / 32768.0)
                    .collect(),
                false,
            )
        }
        (fmt, bits) => {
            return Err(CliError::Io(format!(
                "{}: unsupported format {fmt:?}/{bits} bits (want 16-bit int or 32-bit float)",
                path.display()
            )));
        }
    };
    Ok(Audio {
        samples,
        sample_rate: spec.sample_rate,
        float,
    })
}

pub fn write_wav(path: &Path, audio: &Audio) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate,
        bits_per_sample: if audio.float { 32 } else { 16 },
        sample_format: if audio.float {
            hound::SampleFormat::Float
        } else {
            hound::SampleFormat::Int
        },
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    if audio.float {
        for &v in &audio.samples {
            writer.write_sample(v as f32)?;
        }
    } else {
        for &v in &audio.samples {
            let q = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
            writer.write_sample(q)?;
        }
    }
    writer.finalize()?;
    Ok(())
}
