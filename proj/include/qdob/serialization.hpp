#pragma once

#include <string>

#include <json.hpp>

#include "qdob/channel.hpp"
#include "qdob/mps.hpp"
#include "qdob/products.hpp"
#include "qdob/random_cocycle.hpp"

namespace qdob {

using json = nlohmann::json;

// matrices as row-major [re, im] entry lists
json matrix_to_json(const Mat& m);
Mat matrix_from_json(const json& j, int rows, int cols);

// channel: {"d": int, "kraus": [ per-matrix row-major entry list ]}
json channel_to_json(const QuantumChannel& phi);
QuantumChannel channel_from_json(const json& j);

// named channel or explicit Kraus family
json label_to_json(const ChannelLabel& label);
ChannelLabel label_from_json(const json& j);

// sequence: explicit {"d","interval":[lo,hi],"channels":[...]} or
// rule-based {"d","rule":{"name":"constant"|"cycle","channels":[...]}}
json sequence_to_json(const json& described);  // identity helper for configs
ChannelSequence sequence_from_json(const json& j);

// base: {"kind","d","seed","atoms":[{"weight":w,"channel":spec}],"P":rows,"pi":[...]}
json base_to_json(const EnvironmentBase& base);
EnvironmentBase base_from_json(const json& j);

// chain: {"d_K","D_H","sites":[ per-site list of tensors ]}
json chain_to_json(const MpsChain& chain);
MpsChain chain_from_json(const json& j);

json observable_to_json(const LocalObservable& obs);
LocalObservable observable_from_json(const json& j, int d_k);

}  // namespace qdob
