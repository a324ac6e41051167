#pragma once

#include <cstddef>

// Data-parallel inner loops behind the tensor ops. Every kernel has a scalar
// reference implementation and, on x86-64, an AVX2 variant selected at
// runtime. Elementwise kernels (add, mul, madd, scale, axpy, adam_update) are
// bitwise identical across implementations; reductions (dot, sum) may differ
// by association order and are equivalence-tested under a tolerance.
namespace sentrep::kernels {

enum class Isa { scalar, avx2 };

bool avx2_supported();
Isa active_isa();
// Overrides the detected ISA; used by the equivalence tests.
void force_isa(Isa isa);
void reset_isa();

template <class T>
T dot(const T* a, const T* b, size_t n);

// y += alpha * x
template <class T>
void axpy(T* y, T alpha, const T* x, size_t n);

template <class T>
void add(T* out, const T* a, const T* b, size_t n);

template <class T>
void mul(T* out, const T* a, const T* b, size_t n);

// y += a * b (elementwise)
template <class T>
void madd(T* y, const T* a, const T* b, size_t n);

// y *= alpha
template <class T>
void scale(T* y, T alpha, size_t n);

template <class T>
T sum(const T* a, size_t n);

// Index of the first maximal element; n must be >= 1, inputs finite.
template <class T>
size_t argmax(const T* a, size_t n);

// One Adam step over a parameter block. bias1/bias2 are the precomputed
// correction terms (1 - beta1^t), (1 - beta2^t).
template <class T>
void adam_update(T* w, const T* g, T* m, T* v, size_t n, T lr, T beta1, T beta2,
                 T eps, T bias1, T bias2);

}  // namespace sentrep::kernels
