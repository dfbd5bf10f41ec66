// Copyright 2026 The DLSC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DLSC_DLSC_HPP
#define DLSC_DLSC_HPP

// Umbrella header for the whole toolkit.

#include "dlsc/coefficients.hpp"
#include "dlsc/connectivity.hpp"
#include "dlsc/dictionary.hpp"
#include "dlsc/errors.hpp"
#include "dlsc/ksvd.hpp"
#include "dlsc/matrix_io.hpp"
#include "dlsc/paradigm.hpp"
#include "dlsc/params.hpp"
#include "dlsc/phantom.hpp"
#include "dlsc/pipeline.hpp"
#include "dlsc/signal_matrix.hpp"
#include "dlsc/sparse_coding.hpp"
#include "dlsc/tnlm.hpp"

#endif  // DLSC_DLSC_HPP
