#pragma once

#include <string>

#include "ufcnn/network.hpp"

namespace ufcnn {

inline constexpr const char* kCheckpointFormat = "ufcnn-ckpt-v1";

// JSON container: the config fields plus one flat row-major array per layer
// parameter, keyed "H1.weights", "H1.bias", ... "G0.bias".
void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

}  // namespace ufcnn
