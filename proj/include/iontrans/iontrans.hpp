// Copyright 2026 The iontrans Authors
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

#include "iontrans/channel.hpp"
#include "iontrans/collective.hpp"
#include "iontrans/common.hpp"
#include "iontrans/dynamics.hpp"
#include "iontrans/ionchain.hpp"
#include "iontrans/protocol/gate.hpp"
#include "iontrans/protocol/joint.hpp"
#include "iontrans/protocol/params.hpp"
#include "iontrans/protocol/sideband.hpp"
#include "iontrans/protocol/step1.hpp"
#include "iontrans/protocol/step2.hpp"
#include "iontrans/protocol/step3.hpp"
#include "iontrans/pulse.hpp"
#include "iontrans/statespace.hpp"
#include "iontrans/validation/oracle_suite.hpp"
