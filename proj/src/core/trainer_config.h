// Copyright 2026 ts3codec authors
// Training hyperparameters and the learning-rate schedule.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>

namespace ts3 {

struct TrainerConfig {
    double  beta1        = 0.8;
    double  beta2        = 0.9;
    double  lr_start     = 2e-4;
    double  lr_end       = 2e-5;
    int64_t warmup_steps = 1000;
    int64_t total_steps  = 500000;
    double  crop_seconds = 10.0;
    int64_t batch_size   = 0;  // required: no reproducible published value
    uint64_t seed        = 0;
    int64_t checkpoint_interval = 0;  // 0 saves only at the end of a run
    double  grad_clip           = 0.0;  // 0 disables clipping

    void validate() const;
};

// 0 at step 0, linear to lr_start at warmup_steps, then linear to lr_end at
// total_steps. Out-of-range steps clamp to the endpoints.
double lr_at_step(const TrainerConfig & cfg, int64_t step);

}  // namespace ts3
