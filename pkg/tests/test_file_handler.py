import os

from app.file_handler import CorpusStore, read_instance, read_text, write_text


class TestFileHelpers:

    def test_write_text_creates_directories(self, tmp_path):
        """書き込み先のディレクトリが無い場合は作成されること"""
        path = tmp_path / 'a' / 'b' / 'out.json'

        write_text(str(path), '{}\n')

        assert read_text(str(path)) == '{}\n'

    def test_read_instance(self, five_node_instance_path, five_node_instance):
        """パスからインスタンスを読み込めること"""
        assert read_instance(five_node_instance_path) == five_node_instance


class TestCorpusStore:

    def test_default_directory_from_environment(self, tmp_corpus_dir):
        """ディレクトリ未指定の場合は環境変数の値を使うこと"""
        assert CorpusStore().directory == tmp_corpus_dir

    def test_save_and_load_instances(self, tmp_corpus_dir, five_node_instance, three_cycle_instance):
        """保存したインスタンスを番号順に読み込めること"""
        store = CorpusStore()

        saved = store.save_instances([five_node_instance, three_cycle_instance])

        assert [os.path.basename(path) for path in saved] == ['instance_0000.json', 'instance_0001.json']
        assert store.load_instances() == [five_node_instance, three_cycle_instance]

    def test_save_instance_error(self, tmp_corpus_dir, five_node_instance, mocker, caplog):
        """書き込みに失敗した場合は False を返しエラーログを出すこと"""
        mocker.patch('app.file_handler.write_text', side_effect=OSError('disk full'))

        assert CorpusStore().save_instance(0, five_node_instance) is False
        assert 'Error saving instance 0' in caplog.text

    def test_list_missing_directory(self, tmp_path, caplog):
        """ディレクトリが存在しない場合は空のリストを返すこと"""
        store = CorpusStore(str(tmp_path / 'missing'))

        assert store.list_instance_paths() == []
        assert 'Error listing corpus directory' in caplog.text

    def test_load_skips_broken_files(self, tmp_corpus_dir, five_node_instance, caplog):
        """壊れたファイルは飛ばして読み込むこと"""
        store = CorpusStore()
        store.save_instance(0, five_node_instance)
        write_text(store.instance_path(1), '{ broken')

        assert store.load_instances() == [five_node_instance]
        assert 'Error loading' in caplog.text

    def test_ignores_other_files(self, tmp_corpus_dir, five_node_instance):
        """インスタンス以外のファイルは一覧に含まれないこと"""
        store = CorpusStore()
        store.save_instance(0, five_node_instance)
        store.save_report('report.json', {'a': 1})

        assert len(store.list_instance_paths()) == 1

    def test_save_csv(self, tmp_corpus_dir):
        """ヘッダ付きの CSV を保存できること"""
        store = CorpusStore()

        assert store.save_csv('ratios.csv', ('index', 'ratio'), [(1, 2.0), (2, 1.5)]) is True
        lines = read_text(os.path.join(tmp_corpus_dir, 'ratios.csv')).splitlines()
        assert lines == ['index,ratio', '1,2.0', '2,1.5']
