// Copyright 2026 The gradsched Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GRADSCHED_GRADSCHED_HPP_
#define GRADSCHED_GRADSCHED_HPP_

#include "gradsched/comm_model.hpp"
#include "gradsched/errors.hpp"
#include "gradsched/planner.hpp"
#include "gradsched/sweep.hpp"
#include "gradsched/timeline.hpp"
#include "gradsched/trace.hpp"

#endif  // GRADSCHED_GRADSCHED_HPP_
