#pragma once

#define QBEAT_VERSION "1.0.0"
