// Copyright 2026 ts3codec authors
// JSON bridges for the three config structs. Config files reject unknown
// keys, and named codec configs take no overrides.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/adversary.h"
#include "core/model.h"
#include "core/trainer_config.h"

#include <json.hpp>

namespace ts3 {

nlohmann::json codec_config_to_json(const CodecConfig & c);
CodecConfig    codec_config_from_json(const nlohmann::json & j);

nlohmann::json discriminator_config_to_json(const DiscriminatorConfig & c);
DiscriminatorConfig discriminator_config_from_json(const nlohmann::json & j);

nlohmann::json trainer_config_to_json(const TrainerConfig & c);
TrainerConfig  trainer_config_from_json(const nlohmann::json & j);

}  // namespace ts3
