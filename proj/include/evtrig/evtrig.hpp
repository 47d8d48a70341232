#pragma once

#include "evtrig/capacity.hpp"
#include "evtrig/channel.hpp"
#include "evtrig/codec.hpp"
#include "evtrig/errors.hpp"
#include "evtrig/linalg.hpp"
#include "evtrig/lp.hpp"
#include "evtrig/plant.hpp"
#include "evtrig/scenario.hpp"
#include "evtrig/sim.hpp"
#include "evtrig/triggers.hpp"
