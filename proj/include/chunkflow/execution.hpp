// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace chunkflow {

/// Serial is the reference path; Parallel uses OpenMP and must produce
/// bit-identical results.
enum class Execution { Serial, Parallel };

}  // namespace chunkflow
