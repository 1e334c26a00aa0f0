#pragma once

#include "ortus/config.hpp"
#include "ortus/connectome.hpp"
#include "ortus/dsl.hpp"
#include "ortus/error.hpp"
#include "ortus/experiment.hpp"
#include "ortus/kernel.hpp"
#include "ortus/physiology.hpp"
#include "ortus/plasticity.hpp"
#include "ortus/protocol.hpp"
