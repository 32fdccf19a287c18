/* Copyright 2026 The layeranat Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include "layeranat/error.hpp"
#include "layeranat/tensor.hpp"
#include "layeranat/rng.hpp"
#include "layeranat/autograd.hpp"
#include "layeranat/optim.hpp"
#include "layeranat/corpus.hpp"
#include "layeranat/model.hpp"
#include "layeranat/checkpoint.hpp"
#include "layeranat/parallel.hpp"
#include "layeranat/linalg.hpp"
#include "layeranat/training.hpp"
#include "layeranat/diagnostics.hpp"
#include "layeranat/growth.hpp"
#include "layeranat/report.hpp"
