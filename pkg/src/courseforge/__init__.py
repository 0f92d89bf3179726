"""Course package generation through role-playing chat agents.

The pipeline walks a course idea through analysis, design, and development
subtasks, each run as a short deliberation between role agents, and leaves a
complete instructional package on disk: learning objectives, a syllabus,
chapterized Beamer decks, presenter scripts, and assessments.
"""

__version__ = "0.1.0"

from courseforge.errors import CourseforgeError

__all__ = ["CourseforgeError", "__version__"]
