#pragma once

#include <map>
#include <string>
#include <vector>

#include "idface/nn.hpp"
#include "idface/tensor.hpp"

namespace idface {

// "NAC1" named-array container. Layout:
//   magic "NAC1", u32 array count, then per array:
//   u16 name length, name bytes, u8 ndim, u32 dims[ndim], f32 payload.
// All integers and floats little-endian.
void save_arrays(const std::string& path,
                 const std::vector<std::pair<std::string, const Tensor*>>& arrays);
std::map<std::string, Tensor> load_arrays(const std::string& path);

// Parameter-registry convenience: names come from the registry entries.
void save_params(const std::string& path, const nn::ParamRefs<float>& params);
// Strict: every registered parameter must be present with a matching shape.
void load_params(const std::string& path, const nn::ParamRefs<float>& params);

}  // namespace idface
