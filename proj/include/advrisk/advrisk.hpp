#pragma once

#include "advrisk/classifiers.hpp"
#include "advrisk/duality.hpp"
#include "advrisk/errors.hpp"
#include "advrisk/extreal.hpp"
#include "advrisk/geometry.hpp"
#include "advrisk/instance.hpp"
#include "advrisk/losses.hpp"
#include "advrisk/measures.hpp"
#include "advrisk/risks.hpp"
#include "advrisk/rng.hpp"
#include "advrisk/sums.hpp"
#include "advrisk/transport.hpp"
