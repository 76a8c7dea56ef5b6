import csv
import logging
import os
from typing import List, Optional, Sequence

from app import validator
from app.errors import DissemError
from app.instance import DisseminationInstance
from app.settings import get_corpus_dir

logger = logging.getLogger(__name__)

INSTANCE_PREFIX = 'instance_'
INSTANCE_SUFFIX = '.json'


def read_text(path: str) -> str:
    with open(path, encoding='utf-8') as f:
        return f.read()


def write_text(path: str, text: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)


def read_instance(path: str) -> DisseminationInstance:
    return validator.load_instance(read_text(path))


class CorpusStore:
    """
    生成したインスタンスと実験結果を置くディレクトリの管理を行うクラス
    """

    def __init__(self, directory: Optional[str] = None):
        self.directory = directory or get_corpus_dir()

    def instance_path(self, index: int) -> str:
        return os.path.join(self.directory, f"{INSTANCE_PREFIX}{index:04d}{INSTANCE_SUFFIX}")

    def save_instance(self, index: int, inst: DisseminationInstance) -> bool:
        """
        インスタンスを JSON で保存
        """
        try:
            write_text(self.instance_path(index), validator.dumps(validator.serialize_instance(inst)) + '\n')
            return True
        except OSError as e:
            logger.error("Error saving instance %d: %s", index, e)
            return False

    def save_instances(self, instances: Sequence[DisseminationInstance]) -> List[str]:
        """
        まとめて保存し、保存できたファイルのパスを返す
        """
        saved = []
        for index, inst in enumerate(instances):
            if self.save_instance(index, inst):
                saved.append(self.instance_path(index))
        return saved

    def list_instance_paths(self) -> List[str]:
        try:
            names = sorted(name for name in os.listdir(self.directory)
                           if name.startswith(INSTANCE_PREFIX) and name.endswith(INSTANCE_SUFFIX))
        except OSError as e:
            logger.error("Error listing corpus directory %s: %s", self.directory, e)
            return []
        return [os.path.join(self.directory, name) for name in names]

    def load_instances(self) -> List[DisseminationInstance]:
        """
        ディレクトリ内のインスタンスを全て読む。読めないファイルはログに残して飛ばす
        """
        instances = []
        for path in self.list_instance_paths():
            try:
                instances.append(read_instance(path))
            except (OSError, DissemError) as e:
                logger.error("Error loading %s: %s", path, e)
        return instances

    def save_report(self, name: str, body: dict) -> bool:
        try:
            write_text(os.path.join(self.directory, name), validator.dumps(body) + '\n')
            return True
        except OSError as e:
            logger.error("Error saving report %s: %s", name, e)
            return False

    def save_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence]) -> bool:
        path = os.path.join(self.directory, name)
        try:
            os.makedirs(self.directory, exist_ok=True)
            with open(path, 'w', encoding='utf-8', newline='') as f:
                writer = csv.writer(f)
                writer.writerow(header)
                writer.writerows(rows)
            return True
        except OSError as e:
            logger.error("Error saving CSV %s: %s", name, e)
            return False
