// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "ftlab/kernels.hpp"

namespace ftlab::kern {

namespace {

const Ops& select() {
  const char* force = std::getenv("FTLAB_KERNELS");
  if (force != nullptr) {
    if (std::strcmp(force, "scalar") == 0) return scalar_ops();
    if (std::strcmp(force, "avx2") == 0) {
      if (const Ops* ops = avx2_ops()) return *ops;
      throw std::runtime_error("FTLAB_KERNELS=avx2 but CPU lacks AVX2+FMA");
    }
    if (std::strcmp(force, "avx512") == 0) {
      if (const Ops* ops = avx512_ops()) return *ops;
      throw std::runtime_error("FTLAB_KERNELS=avx512 but CPU lacks AVX-512F");
    }
    throw std::runtime_error(std::string("unknown FTLAB_KERNELS value: ") +
                             force);
  }
  if (const Ops* ops = avx512_ops()) return *ops;
  if (const Ops* ops = avx2_ops()) return *ops;
  return scalar_ops();
}

}  // namespace

const Ops& active() {
  static const Ops& ops = select();
  return ops;
}

std::vector<const Ops*> supported_variants() {
  std::vector<const Ops*> v{&scalar_ops()};
  if (const Ops* ops = avx2_ops()) v.push_back(ops);
  if (const Ops* ops = avx512_ops()) v.push_back(ops);
  return v;
}

}  // namespace ftlab::kern
