#pragma once

// Multiplicative-convolution toolkit: log-coordinate grids, Euler-operator
// calculus, kernel distributions, convolution engines with direct and FFT
// paths, eigenvalue extraction, and an exact symbolic layer for
// distributions supported at the origin.

#include "hadamard/convolve.hpp"
#include "hadamard/deltasym.hpp"
#include "hadamard/euler.hpp"
#include "hadamard/families.hpp"
#include "hadamard/fft.hpp"
#include "hadamard/io.hpp"
#include "hadamard/kernel.hpp"
#include "hadamard/loggrid.hpp"
#include "hadamard/spectra.hpp"
#include "hadamard/tensor.hpp"
