// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint archive: a self-describing binary file mapping parameter
// dot-path names to {shape, little-endian float32 data}, preceded by a JSON
// metadata record (config, seed, step count). Loading validates every name
// and shape against the receiving model.
#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "deshade/nn.hpp"
#include "deshade/tensor.hpp"

namespace deshade::ckpt {

struct Archive {
    nlohmann::json meta;
    std::map<std::string, Tensor<float>> tensors;
};

void save(const std::string& path, const Archive& archive);
Archive load(const std::string& path);

template <class T>
Archive from_params(const ParamStore<T>& ps, nlohmann::json meta) {
    Archive a;
    a.meta = std::move(meta);
    a.tensors = ps.state_dict();
    return a;
}

// Restores parameters whose names carry the given prefix; the prefix is
// stripped before matching model names.
template <class T>
void load_params(ParamStore<T>& ps, const Archive& archive,
                 const std::string& prefix = "") {
    std::map<std::string, Tensor<float>> picked;
    for (auto& [name, t] : archive.tensors) {
        if (name.rfind(prefix, 0) == 0)
            picked[name.substr(prefix.size())] = t;
    }
    ps.load_state(picked);
}

// Restores exactly the receiving store's parameter names; extra archive
// entries (other sub-models in the same file) are ignored.
template <class T>
void load_params_named(ParamStore<T>& ps, const Archive& archive) {
    for (auto& [name, p] : ps.params) {
        auto it = archive.tensors.find(name);
        require(it != archive.tensors.end(), "checkpoint missing parameter: " + name);
        require(it->second.shape == p->value.shape,
                "checkpoint shape mismatch for " + name);
        p->value = it->second.template cast<T>();
    }
}

}  // namespace deshade::ckpt
