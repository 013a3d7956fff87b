import logging
import sys

from cli.commands import run
from config.settings import get_settings

# Configure logging; stdout carries results, so logs go to stderr
logging.basicConfig(
    level=get_settings().log_level,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)

if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
