#ifndef DSENH_METRICS_HPP
#define DSENH_METRICS_HPP

#include <vector>

#include "dsenh/loss.hpp"
#include "dsenh/waveform.hpp"

namespace dsenh {

// Extended short-time objective intelligibility (ESTOI). Fixed constants of
// the published algorithm: 10 kHz analysis rate, 256-sample frames zero
// padded to a 512 FFT at 50% overlap, 15 one-third-octave bands from 150 Hz,
// a 40 dB silence-removal VAD relative to the loudest clean frame, and
// 384 ms (30-frame) segments with row/column normalized envelope
// correlation. Inputs are 16 kHz and equal length; scores lie in [-1, 1].
double estoi(const Waveform& clean, const Waveform& processed);

}  // namespace dsenh

#endif
