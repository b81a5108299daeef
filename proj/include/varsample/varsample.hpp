#pragma once

#include "varsample/bounds.hpp"
#include "varsample/injectivity.hpp"
#include "varsample/io.hpp"
#include "varsample/kernel_search.hpp"
#include "varsample/known_constructions.hpp"
#include "varsample/linalg.hpp"
#include "varsample/recovery.hpp"
#include "varsample/rng.hpp"
#include "varsample/sampling.hpp"
#include "varsample/types.hpp"
#include "varsample/varieties.hpp"
