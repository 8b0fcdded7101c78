#ifndef DSENH_WAVIO_HPP
#define DSENH_WAVIO_HPP

#include <string>

#include "dsenh/waveform.hpp"

namespace dsenh {

// Reads a RIFF/WAVE file (PCM16 or IEEE float32, mono or first channel of a
// multichannel file) and returns it resampled to the 16 kHz pipeline rate.
Waveform read_wav(const std::string& path);

// Same, but keeps the file's native sample rate.
Waveform read_wav_native(const std::string& path);

// Writes mono PCM16 little-endian with saturating float conversion.
void write_wav(const std::string& path, const Waveform& w);

}  // namespace dsenh

#endif
