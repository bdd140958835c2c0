/*
   Copyright 2026 The oplim Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include "oplim/error.hpp"
#include "oplim/rng.hpp"
#include "oplim/density.hpp"
#include "oplim/family.hpp"
#include "oplim/measure.hpp"
#include "oplim/banded.hpp"
#include "oplim/symbol.hpp"
#include "oplim/rn.hpp"
#include "oplim/criteria.hpp"
#include "oplim/builtins.hpp"
#include "oplim/spec_io.hpp"
#include "oplim/report.hpp"
