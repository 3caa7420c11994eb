#pragma once

namespace dudemec {

/// Offloadable computation task: B^I input bits, with output size and CPU
/// cycles proportional to the input.
struct TaskSpec {
  double input_bits = 0.0;      // B^I
  double output_ratio = 0.0;    // alpha, output bits per input bit
  double cycles_per_bit = 0.0;  // beta, CPU cycles per input bit

  double output_bits() const { return output_ratio * input_bits; }  // B^O
  double cycles() const { return cycles_per_bit * input_bits; }     // B^C
};

}  // namespace dudemec
