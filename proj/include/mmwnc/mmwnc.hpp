// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MMWNC_MMWNC_HPP
#define MMWNC_MMWNC_HPP

#include "arrival.hpp"
#include "bounds.hpp"
#include "channel.hpp"
#include "errors.hpp"
#include "inverse_moment.hpp"
#include "random.hpp"
#include "runner.hpp"
#include "scenario.hpp"
#include "service_bound.hpp"
#include "simulator.hpp"

#endif
