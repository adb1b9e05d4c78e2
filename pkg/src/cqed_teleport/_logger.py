import logging

logger = logging.getLogger("cqed_teleport")
