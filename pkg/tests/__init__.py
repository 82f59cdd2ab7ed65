import os
import sys
PROJECT_PATH = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SOURCE_PATH = os.path.join(
    PROJECT_PATH,"."
)
sys.path.append(SOURCE_PATH)
