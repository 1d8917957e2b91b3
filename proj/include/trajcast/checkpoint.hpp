// Copyright 2026 The Trajcast Authors
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

#pragma once

#include <map>
#include <string>

#include "trajcast/tensor.hpp"

namespace trajcast {

// Binary checkpoint: versioned header, then per tensor the name, shape and
// raw little-endian 64-bit values.
void save_checkpoint(const std::map<std::string, ad::Tensor>& tensors, const std::string& path);
std::map<std::string, ad::Tensor> load_checkpoint(const std::string& path);

}  // namespace trajcast
